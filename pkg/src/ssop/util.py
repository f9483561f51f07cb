"""Shared helpers: errors, seeding, weighted inner products, small parsers."""

from __future__ import annotations

import re

import numpy as np


class SsopError(Exception):
    """Base class for package errors."""


class InvalidArgumentError(SsopError, ValueError):
    """An argument violates a documented precondition."""


class IntegrationFailureError(SsopError, RuntimeError):
    """Time integration stopped before the end of the interval."""


class NumericalError(SsopError, RuntimeError):
    """A numerical operation produced an unusable result."""


class InvalidNonlinearityError(SsopError, ValueError):
    """The supplied nonlinearity fails a structural self-test."""


class SchemaError(SsopError, ValueError):
    """A config or file failed schema validation."""


def rng_for(root_seed, *path):
    """Counter-style RNG derivation: one root seed, one stream per purpose.

    ``path`` elements are small non-negative integers identifying the purpose
    (stage, trajectory index, ...); equal (seed, path) pairs give bit-identical
    streams.
    """
    ss = np.random.SeedSequence(entropy=int(root_seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(root_seed, *path):
    """A child integer seed on the same counter-based tree as rng_for."""
    ss = np.random.SeedSequence(entropy=int(root_seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0] & 0x7FFFFFFF)


def wdot(w, a, b):
    """Weighted inner product <a, b>_x = b^* W a with diagonal weights ``w``."""
    return np.vdot(b, w * a)


def wnorm(w, a):
    """Weighted norm ||a||_x."""
    return np.sqrt(np.real(np.vdot(a, w * a)))


def wnorm_traj(w, states):
    """Space-time norm of a state history (columns are time steps)."""
    return np.sqrt(np.sum(w[:, None] * np.abs(states) ** 2))


def left_wmult(modes, w):
    """Return modes^* W as a dense matrix (W diagonal with entries ``w``)."""
    return modes.conj().T * w[None, :]


def parse_extended_float(text):
    """Parse a float, also accepting fractional powers of ten like ``1e-1.8``.

    The plain float grammar forbids a fractional exponent, but thresholds are
    naturally quoted that way on the command line.
    """
    try:
        return float(text)
    except ValueError:
        pass
    m = re.fullmatch(r"([+-]?\d+(?:\.\d*)?)[eE]([+-]?\d+\.\d+)", text.strip())
    if m is None:
        raise InvalidArgumentError(f"cannot parse number: {text!r}")
    return float(m.group(1)) * 10.0 ** float(m.group(2))
