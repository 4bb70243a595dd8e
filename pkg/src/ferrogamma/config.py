"""Flat `key = value` run configuration with dotted section keys.

Example::

    # screened-energy sweep
    domain.R = 1.0
    domain.N = 64
    domain.level = 3
    physics.alpha = 1.0
    physics.eta = 0.3
    sweep.eps = 0.4, 0.2828427124746190, 0.2
    solver.pad_factor = 8
    optim.step = 0.05
    optim.iters = 200
    optim.tol = 1e-3
    optim.mode = relaxed
    experiment = demo
    field = tangential-splay
    output = out
    seed = 1234
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import ConfigError
from .gammalab import default_eps_values


@dataclass(frozen=True)
class RunConfig:
    radius: float = 1.0
    n: int = 48
    level: int = -1  # -1: pick by grid size (3 up to N=96, 4 beyond)
    alpha: float = 1.0
    eta: float = 0.3
    eps_values: tuple = field(default_factory=default_eps_values)
    pad_factor: float = 8.0
    step: float = 0.05
    iters: int = 200
    tol: float = 1e-3
    mode: str = "relaxed"
    experiment: str = "run"
    field_name: str = "tangential-splay"
    output: str = "."
    seed: int | None = None

    def __post_init__(self):
        if self.radius <= 0:
            raise ConfigError(f"domain.R must be positive, got {self.radius}")
        if self.n < 8:
            raise ConfigError(f"domain.N must be >= 8, got {self.n}")
        if self.level < -1 or self.level > 6:
            raise ConfigError(f"domain.level must be in [0, 6] (or -1 auto), got {self.level}")
        if self.alpha <= 0:
            raise ConfigError(f"physics.alpha must be positive, got {self.alpha}")
        if self.eta <= 0:
            raise ConfigError(f"physics.eta must be positive, got {self.eta}")
        if not self.eps_values or any(e <= 0 for e in self.eps_values):
            raise ConfigError("sweep.eps must be a nonempty list of positive values")
        if any(a <= b for a, b in zip(self.eps_values, self.eps_values[1:])):
            raise ConfigError("sweep.eps must be strictly decreasing")
        if self.pad_factor <= 0:
            raise ConfigError(f"solver.pad_factor must be positive, got {self.pad_factor}")
        if self.step <= 0 or self.iters < 1 or self.tol <= 0:
            raise ConfigError("optim.step/iters/tol must be positive")
        if self.mode not in ("relaxed", "constrained"):
            raise ConfigError(f"optim.mode must be relaxed or constrained, got {self.mode!r}")


_PARSERS = {
    "domain.R": ("radius", float),
    "domain.N": ("n", int),
    "domain.level": ("level", int),
    "physics.alpha": ("alpha", float),
    "physics.eta": ("eta", float),
    "sweep.eps": ("eps_values", lambda s: tuple(float(v) for v in s.split(","))),
    "solver.pad_factor": ("pad_factor", float),
    "optim.step": ("step", float),
    "optim.iters": ("iters", int),
    "optim.tol": ("tol", float),
    "optim.mode": ("mode", str),
    "experiment": ("experiment", str),
    "field": ("field_name", str),
    "output": ("output", str),
    "seed": ("seed", int),
}


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    updates = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        attr, conv = _PARSERS[key]
        try:
            updates[attr] = conv(value)
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    base = base if base is not None else RunConfig()
    return replace(base, **updates)


def read_config(path, base: RunConfig | None = None) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), base)
