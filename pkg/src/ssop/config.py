"""Experiment configuration: JSON schema, validation, round-tripping.

Unknown keys are rejected so config typos fail loudly. Complex scalars are
written as [re, im] pairs.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

from ssop.util import SchemaError

CUBIC_FORCING_AMPLITUDE = 0.05
QUADRATIC_FORCING_AMPLITUDE = 0.02


def _complex_from(v):
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def _complex_to(c):
    return [c.real, c.imag]


def _check_keys(d, cls, where):
    allowed = {f.name for f in fields(cls)}
    unknown = set(d) - allowed
    if unknown:
        raise SchemaError(f"unknown key(s) {sorted(unknown)} in {where}")


@dataclass
class SystemConfig:
    n_x: int = 220
    half_width: float = 40.0
    nonlinearity: str = "cubic"
    mu0: float = 0.229
    nu: complex = 2.0 + 0.4j
    gamma: complex = 1.0 - 1.0j
    c_mu: float = 0.2
    mu2: float = -0.01
    alpha: float = 1.0
    kappa: float = 5.0
    auto_stability_shift: bool = True

    @classmethod
    def from_dict(cls, d):
        _check_keys(d, cls, "system")
        d = dict(d)
        for key in ("nu", "gamma"):
            if key in d:
                d[key] = _complex_from(d[key])
        return cls(**d)

    def to_dict(self):
        d = asdict(self)
        d["nu"] = _complex_to(self.nu)
        d["gamma"] = _complex_to(self.gamma)
        return d


@dataclass
class DataConfig:
    n_steps: int = 3000
    dt: float = 0.8
    n_omega: int = 256
    overlap: float = 0.75
    forcing_amplitude: float | None = None
    ic_spacing: int = 32

    @classmethod
    def from_dict(cls, d):
        _check_keys(d, cls, "data")
        return cls(**d)

    def to_dict(self):
        return asdict(self)


@dataclass
class RomConfig:
    r: int = 5
    p1: int = 30
    p2: int = 30
    closure: str = "deim"
    epsilon: float = 10.0**-1.8
    h_mode: str = "galerkin"

    @classmethod
    def from_dict(cls, d):
        _check_keys(d, cls, "rom")
        return cls(**d)

    def to_dict(self):
        return asdict(self)


@dataclass
class TestConfig:
    n_test: int = 30
    forcings: list = field(default_factory=lambda: ["stochastic"])
    mu0_list: list = field(default_factory=list)
    method: str = "auto"
    tol: float = 1e-10
    max_iter: int = 100
    max_steps: int = 5000
    epsilon_sweep: list = field(default_factory=list)

    @classmethod
    def from_dict(cls, d):
        _check_keys(d, cls, "test")
        return cls(**d)

    def to_dict(self):
        return asdict(self)


@dataclass
class ExperimentConfig:
    experiment_id: str = "experiment"
    seed: int = 0
    out_dir: str | None = None
    system: SystemConfig = field(default_factory=SystemConfig)
    data: DataConfig = field(default_factory=DataConfig)
    rom: RomConfig = field(default_factory=RomConfig)
    test: TestConfig = field(default_factory=TestConfig)

    @classmethod
    def from_dict(cls, d):
        _check_keys(d, cls, "config")
        d = dict(d)
        parts = {}
        for key, sub in (
            ("system", SystemConfig),
            ("data", DataConfig),
            ("rom", RomConfig),
            ("test", TestConfig),
        ):
            parts[key] = sub.from_dict(d.pop(key, {}))
        return cls(**d, **parts)

    def to_dict(self):
        return {
            "experiment_id": self.experiment_id,
            "seed": self.seed,
            "out_dir": self.out_dir,
            "system": self.system.to_dict(),
            "data": self.data.to_dict(),
            "rom": self.rom.to_dict(),
            "test": self.test.to_dict(),
        }

    def validate(self):
        if self.data.forcing_amplitude is None:
            self.data.forcing_amplitude = (
                CUBIC_FORCING_AMPLITUDE
                if self.system.nonlinearity == "cubic"
                else QUADRATIC_FORCING_AMPLITUDE
            )
        if self.system.nonlinearity not in ("cubic", "quadratic"):
            raise SchemaError("system.nonlinearity must be 'cubic' or 'quadratic'")
        if self.rom.closure not in ("deim", "triadic", "dense", "none"):
            raise SchemaError("rom.closure must be one of deim/triadic/dense/none")
        if self.rom.closure == "triadic" and self.system.nonlinearity != "quadratic":
            raise SchemaError("the triadic closure requires the quadratic system")
        if self.data.n_steps < self.data.n_omega:
            raise SchemaError("data.n_steps must cover at least one block")
        if not (0 <= self.data.overlap < 1):
            raise SchemaError("data.overlap must be in [0, 1)")
        for kind in self.test.forcings:
            if kind not in ("stochastic", "periodic", "pulse", "quasiperiodic", "series"):
                raise SchemaError(f"unknown test forcing kind {kind!r}")
        return self
