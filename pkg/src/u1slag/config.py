"""Run configuration read from TOML.

Example::

    seed = 0
    h = 0.05

    [domain]
    kind = "ellipse"
    semi_axes = [1.0, 1.0]

    [boundary]
    cos = [0.0, 0.0, 1.0]

    [solve]
    a = 0.0
    a_floor = 1e-4

    [fibration]
    a_values = [0.0, 0.25]
    b_values = [0.0, 0.5]
    c_values = [0.0, 0.5]
"""

import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .domain import BoundaryFunction, make_domain
from .errors import ConfigError, DomainError
from .solver import SolveOptions

_SOLVE_KEYS = {f.name for f in dataclasses.fields(SolveOptions)}


@dataclass
class FibrationConfig:
    mode: str = "family"
    a_values: list = field(default_factory=list)
    b_values: list = field(default_factory=lambda: [0.0])
    c_values: list = field(default_factory=lambda: [0.0])
    # explicit mode: fibres over (a, Re b, Im b)
    points: list = field(default_factory=lambda: [[0.0, 0.0, 0.0]])
    radii: int = 17
    r_max: float = 1.5
    samples: int = 1000


@dataclass
class RunConfig:
    domain: dict
    h: float = 0.05
    boundary: dict = field(default_factory=dict)
    a: float = 1.0
    solve: dict = field(default_factory=dict)
    analysis: dict = field(default_factory=lambda: {"singularities": True})
    fibration: FibrationConfig = field(default_factory=FibrationConfig)
    theta_count: int = 16
    out: str = "out"
    seed: int = 0
    base_dir: str = "."

    def __post_init__(self):
        if not self.h > 0:
            raise ConfigError(f"h must be positive, got {self.h}")
        if self.theta_count < 8:
            raise ConfigError("theta_count must be at least 8")
        if self.fibration.mode not in ("family", "explicit"):
            raise ConfigError(f"unknown fibration mode {self.fibration.mode!r}")
        unknown = set(self.solve) - _SOLVE_KEYS
        if unknown:
            raise ConfigError(f"unknown solve options {sorted(unknown)}")
        try:
            self.options()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        samples = self.boundary.get("samples")
        if samples is not None and not self._resolve(samples).is_file():
            raise ConfigError(f"boundary sample file {samples!r} not found")

    def _resolve(self, p):
        p = Path(p)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def options(self):
        return SolveOptions(**self.solve)

    def make_domain(self):
        d = dict(self.domain)
        try:
            return make_domain(d.pop("kind", "ellipse"), **d)
        except (DomainError, TypeError) as exc:
            raise ConfigError(f"bad domain: {exc}") from exc

    def make_phi(self, domain):
        b = self.boundary
        if "samples" in b:
            data = np.loadtxt(self._resolve(b["samples"]), delimiter=",", skiprows=1, ndmin=2)
            return BoundaryFunction.from_samples(domain, data[:, 0], data[:, 1])
        return BoundaryFunction.trig(domain, cos=b.get("cos", ()), sin=b.get("sin", ()))

    def as_dict(self):
        d = dataclasses.asdict(self)
        d.pop("base_dir")
        return d

    def digest(self):
        blob = json.dumps(self.as_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def replace(self, **changes):
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


def from_dict(raw, base_dir="."):
    raw = dict(raw)
    if "domain" not in raw:
        raise ConfigError("config has no [domain] section")
    solve = dict(raw.pop("solve", {}))
    a = float(solve.pop("a", 1.0))
    fib = raw.pop("fibration", {})
    try:
        fib = FibrationConfig(**fib)
    except TypeError as exc:
        raise ConfigError(f"bad [fibration] section: {exc}") from exc
    out = raw.pop("output", {}).get("dir", "out")
    known = {"domain", "h", "boundary", "analysis", "theta_count", "seed"}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"unknown config keys {sorted(extra)}")
    return RunConfig(solve=solve, a=a, fibration=fib, out=out, base_dir=str(base_dir), **raw)


def load_config(path):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    try:
        raw = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return from_dict(raw, base_dir=path.parent)


def default_config(**overrides) -> RunConfig:
    """Unit disc with ``cos 2 theta`` data."""
    cfg = RunConfig(domain={"kind": "ellipse", "semi_axes": [1.0, 1.0]},
                    boundary={"cos": [0.0, 0.0, 1.0]})
    return cfg.replace(**overrides)


def maybe_load(path: Optional[str]):
    if path is None:
        raise ConfigError("missing domain: pass --config with a [domain] section")
    return load_config(path)
