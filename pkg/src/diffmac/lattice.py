"""Finite-dimensional lattices with exact nearest-point decoding.

Four families are supported: the scalar lattice Z, the cubic lattice Z^n,
the checkerboard lattice D4 and the Gosset lattice E8.  All operations are
vectorised over leading axes, so ``x`` may be a single vector of shape
``(n,)`` or a batch of shape ``(..., n)``.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

KINDS = ("scalar-z", "cubic-zn", "d4", "e8")

# Normalized second moments of the unscaled base lattices.  D4 and E8 are
# stored constants; tests/test_lattice.py re-derives them by Monte Carlo.
NSM = {
    "scalar-z": 1.0 / 12.0,
    "cubic-zn": 1.0 / 12.0,
    "d4": 13.0 / (120.0 * math.sqrt(2.0)),  # 0.0766032...
    "e8": 929.0 / 12960.0,  # 0.0716821...
}

# Covering radii of the unscaled base lattices; used to size search shells.
_COVERING_RADIUS = {"d4": 1.0, "e8": 1.0}


class LatticeError(ValueError):
    pass


def _d4_generator() -> np.ndarray:
    return np.array(
        [
            [2.0, 0.0, 0.0, 0.0],
            [-1.0, 1.0, 0.0, 0.0],
            [0.0, -1.0, 1.0, 0.0],
            [0.0, 0.0, -1.0, 1.0],
        ]
    )


def _e8_generator() -> np.ndarray:
    g = np.zeros((8, 8))
    g[0, 0] = 2.0
    for i in range(1, 7):
        g[i, i - 1] = -1.0
        g[i, i] = 1.0
    g[7, :] = 0.5
    return g


@dataclasses.dataclass(frozen=True, eq=False)
class Lattice:
    """A scaled lattice ``{z @ generator : z integer}``.

    ``generator`` rows are basis vectors and already include ``scale``.
    ``second_moment`` is the per-dimension second moment of the Voronoi
    cell; ``nsm`` is the normalized second moment of the base lattice.
    """

    name: str
    dim: int
    base_generator: np.ndarray
    scale: float
    nsm: float

    def __post_init__(self):
        if self.dim < 1:
            raise LatticeError(f"dimension must be >= 1, got {self.dim}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise LatticeError(f"scale must be positive and finite, got {self.scale}")
        base = np.array(self.base_generator, dtype=float)
        base.setflags(write=False)
        object.__setattr__(self, "base_generator", base)
        if base.shape != (self.dim, self.dim):
            raise LatticeError(f"generator shape {base.shape} does not match dim {self.dim}")
        if abs(np.linalg.det(base)) < 1e-12:
            raise LatticeError("generator is singular")

    @property
    def generator(self) -> np.ndarray:
        return self.scale * self.base_generator

    @property
    def volume(self) -> float:
        return abs(float(np.linalg.det(self.generator)))

    @property
    def second_moment(self) -> float:
        return self.nsm * self.volume ** (2.0 / self.dim)

    @property
    def covering_radius(self) -> float:
        base = _COVERING_RADIUS.get(self.name, math.sqrt(self.dim) / 2.0)
        return self.scale * base

    def __repr__(self):
        return f"Lattice({self.name!r}, dim={self.dim}, scale={self.scale:.6g}, second_moment={self.second_moment:.6g})"


def make_lattice(kind: str, dim: int | None = None, scale: float = 1.0) -> Lattice:
    """Build a lattice of the given kind.

    ``dim`` is implied for ``scalar-z`` (1), ``d4`` (4) and ``e8`` (8); if
    passed it must agree.
    """
    kind = kind.lower()
    fixed = {"scalar-z": 1, "d4": 4, "e8": 8}
    if kind not in KINDS:
        raise LatticeError(f"unknown lattice kind {kind!r}; expected one of {KINDS}")
    if kind in fixed:
        if dim is not None and dim != fixed[kind]:
            raise LatticeError(f"{kind} has dimension {fixed[kind]}, got {dim}")
        dim = fixed[kind]
    elif dim is None or dim < 1:
        raise LatticeError("cubic-zn needs a positive dimension")
    if not scale > 0:
        raise LatticeError(f"scale must be positive, got {scale}")

    if kind in ("scalar-z", "cubic-zn"):
        base = np.eye(dim)
    elif kind == "d4":
        base = _d4_generator()
    else:
        base = _e8_generator()
    return Lattice(name=kind, dim=dim, base_generator=base, scale=float(scale), nsm=NSM[kind])


# Ties within this distance (base-lattice units) are broken by a fixed rule:
# round half up, first tied coordinate, D8 coset before its half-shift.
TIE_EPS = 1e-9


def _round(x):
    return np.floor(x + (0.5 + TIE_EPS))


def _nearest_dn(x):
    """Nearest point of D_n (integer vectors with even sum), last axis."""
    f = _round(x)
    odd = (np.sum(f, axis=-1) % 2) != 0
    if not np.any(odd):
        return f
    err = x - f
    mag = np.abs(err)
    tied = mag >= np.max(mag, axis=-1, keepdims=True) - TIE_EPS
    idx = np.expand_dims(np.argmax(tied, axis=-1), -1)
    ek = np.take_along_axis(err, idx, axis=-1)
    step = np.where(ek >= -TIE_EPS, 1.0, -1.0)
    g = f.copy()
    np.put_along_axis(g, idx, np.take_along_axis(f, idx, axis=-1) + step, axis=-1)
    return np.where(odd[..., None], g, f)


def _nearest_e8(x):
    a = _nearest_dn(x)
    b = _nearest_dn(x - 0.5) + 0.5
    da = np.sum((x - a) ** 2, axis=-1)
    db = np.sum((x - b) ** 2, axis=-1)
    return np.where((db < da - TIE_EPS)[..., None], b, a)


def _check_input(lat: Lattice, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.shape[-1] != lat.dim:
        raise LatticeError(f"expected trailing dimension {lat.dim}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise LatticeError("input contains non-finite values")
    return x


def cvp_quantize(lat: Lattice, x) -> np.ndarray:
    """Closest lattice point to ``x`` (exact for every supported kind)."""
    x = _check_input(lat, x)
    u = x / lat.scale
    if lat.name in ("scalar-z", "cubic-zn"):
        q = _round(u)
    elif lat.name == "d4":
        q = _nearest_dn(u)
    else:
        q = _nearest_e8(u)
    return q * lat.scale


def mod_lattice(lat: Lattice, x) -> np.ndarray:
    """Reduce ``x`` into the fundamental Voronoi cell: ``x - Q(x)``."""
    x = _check_input(lat, x)
    return x - cvp_quantize(lat, x)


def coefficients(lat: Lattice, point) -> np.ndarray:
    """Real coefficient vector ``z`` with ``point = z @ generator``."""
    point = np.asarray(point, dtype=float)
    return np.linalg.solve(lat.generator.T, point.reshape(-1, lat.dim).T).T.reshape(point.shape)


def is_lattice_point(lat: Lattice, point, tol: float = 1e-6) -> np.ndarray:
    z = coefficients(lat, point)
    return np.all(np.abs(z - np.round(z)) <= tol, axis=-1)


def sample_dither(lat: Lattice, rng: np.random.Generator, size=None) -> np.ndarray:
    """Uniform samples on the Voronoi cell.

    Draws uniformly on the fundamental parallelepiped and folds the result
    into the Voronoi cell with ``mod_lattice``.  ``size`` is the batch shape.
    """
    shape = () if size is None else ((size,) if np.isscalar(size) else tuple(size))
    t = rng.random(shape + (lat.dim,))
    return mod_lattice(lat, t @ lat.generator)


def calibrate_second_moment(lat: Lattice, samples: int, rng: np.random.Generator, chunk: int = 1 << 18):
    """Monte Carlo estimate of the per-dimension second moment.

    Returns ``(estimate, stderr)`` where the standard error is that of the
    sample mean of ``||u||^2 / n``.
    """
    if samples < 10_000:
        raise LatticeError("calibration needs at least 10^4 samples")
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        u = sample_dither(lat, rng, m)
        e = np.sum(u * u, axis=-1) / lat.dim
        total += float(np.sum(e))
        total_sq += float(np.sum(e * e))
        done += m
    mean = total / samples
    var = (total_sq - samples * mean * mean) / (samples - 1)
    return mean, math.sqrt(max(var, 0.0) / samples)


def scale_to_power(lat: Lattice, power: float) -> Lattice:
    """Copy of ``lat`` rescaled so its second moment equals ``power``."""
    if not power > 0:
        raise LatticeError(f"power must be positive, got {power}")
    if not (lat.nsm > 0):
        raise LatticeError("lattice second moment is unknown")
    factor = math.sqrt(power / lat.second_moment)
    return dataclasses.replace(lat, scale=lat.scale * factor)
