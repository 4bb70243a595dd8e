"""Built-in polarization fields used by experiments and the CLI.

Every field is defined as an analytic function of position and sampled at
cell centers, so the same name produces the same mathematical field at any
resolution.  `random-smooth` is a seeded band-limited trigonometric sum
(bounded mode numbers), deterministic given the seed.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .grid import Grid3, ScalarField, VectorField, from_function, scalar_from_function

RANDOM_MODES = 32
MAX_MODE = 4


def radial(grid: Grid3) -> VectorField:
    return from_function(grid, lambda x, y, z: (x, y, z))


def rigid_rotation(grid: Grid3) -> VectorField:
    return from_function(grid, lambda x, y, z: (-y, x, np.zeros_like(z)))


def tangential_splay(grid: Grid3) -> VectorField:
    return from_function(
        grid, lambda x, y, z: (-y + 1.0 - (x**2 + y**2 + z**2), x, np.zeros_like(z))
    )


def axis(grid: Grid3) -> VectorField:
    return from_function(
        grid,
        lambda x, y, z: (np.zeros_like(x), np.zeros_like(y), np.ones_like(z)),
    )


def _mode_table(rng: np.random.Generator, half_width: float):
    """Sample distinct nonzero integer modes and decaying amplitudes."""
    modes = []
    seen = set()
    while len(modes) < RANDOM_MODES:
        m = tuple(int(v) for v in rng.integers(-MAX_MODE, MAX_MODE + 1, size=3))
        if m == (0, 0, 0) or m in seen:
            continue
        seen.add(m)
        modes.append(m)
    k = np.asarray(modes, dtype=np.float64) * (np.pi / half_width)
    amp = rng.standard_normal(RANDOM_MODES) / (1.0 + (np.asarray(modes) ** 2).sum(axis=1))
    phase = rng.uniform(0.0, 2.0 * np.pi, size=RANDOM_MODES)
    return k, amp, phase


def _eval_modes(grid: Grid3, k, amp, phase) -> np.ndarray:
    x, y, z = grid.meshgrid()
    out = np.zeros(grid.dims)
    for km, am, ph in zip(k, amp, phase):
        out += am * np.sin(km[0] * x + km[1] * y + km[2] * z + ph)
    return out


def random_smooth_scalar(grid: Grid3, seed: int, half_width: float | None = None) -> ScalarField:
    rng = np.random.default_rng(seed)
    if half_width is None:
        half_width = -grid.origin[0]
    k, amp, phase = _mode_table(rng, half_width)
    return ScalarField(grid, _eval_modes(grid, k, amp, phase))


def random_smooth(grid: Grid3, seed: int, half_width: float | None = None) -> VectorField:
    rng = np.random.default_rng(seed)
    if half_width is None:
        half_width = -grid.origin[0]
    comps = np.empty((3,) + grid.dims)
    for c in range(3):
        k, amp, phase = _mode_table(rng, half_width)
        comps[c] = _eval_modes(grid, k, amp, phase)
    return VectorField(grid, comps)


def radial_bump(grid: Grid3, seed: int, radius: float = 1.0,
                amplitude: float = 0.3, width: float = 0.25) -> VectorField:
    """Seeded radially-directed bump concentrated near the sphere |x| = radius.

    Used to perturb tangential initial data with a normal component; the
    direction field is x (not x/|x|), so it is smooth at the origin.
    """
    rng = np.random.default_rng(seed)
    a0 = rng.uniform(0.5, 1.0)
    a = rng.uniform(-0.5, 0.5, size=3)

    def fn(x, y, z):
        r = np.sqrt(x**2 + y**2 + z**2)
        envelope = np.exp(-(((r - radius) / width) ** 2))
        rs = np.where(r > 0, r, 1.0)
        angular = a0 + (a[0] * x + a[1] * y + a[2] * z) / rs
        s = amplitude * envelope * angular / radius
        return (s * x, s * y, s * z)

    return from_function(grid, fn)


def scalar_gaussian(grid: Grid3, width: float = 0.35) -> ScalarField:
    return scalar_from_function(
        grid, lambda x, y, z: np.exp(-(x**2 + y**2 + z**2) / (2.0 * width**2))
    )


_BUILTIN = {
    "radial": radial,
    "rigid-rotation": rigid_rotation,
    "tangential-divfree": rigid_rotation,  # alias: tangential and div-free
    "tangential-splay": tangential_splay,
    "axis": axis,
}


def field_names() -> tuple[str, ...]:
    return tuple(_BUILTIN) + ("random-smooth",)


def make_named_field(name: str, grid: Grid3, seed: int | None = None) -> VectorField:
    if name in _BUILTIN:
        return _BUILTIN[name](grid)
    if name == "random-smooth":
        if seed is None:
            raise ConfigError("random-smooth requires a seed")
        return random_smooth(grid, seed)
    raise ConfigError(f"unknown field {name!r}; known: {', '.join(field_names())}")


def named_field_builder(name: str, seed: int | None = None):
    """Builder usable across grids (sweeps resample per resolution)."""
    if name not in _BUILTIN and name != "random-smooth":
        raise ConfigError(f"unknown field {name!r}; known: {', '.join(field_names())}")

    def build(grid: Grid3) -> VectorField:
        return make_named_field(name, grid, seed)

    return build
