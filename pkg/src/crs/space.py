"""Finite-dimensional normed spaces over R^n.

Points and functionals are plain numpy arrays.  Every norm routine works on
the last axis, so a batch of shape ``(m, dim)`` gives ``m`` norms at once.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput

GEOM_TOL = 1e-6


class NormKind(str, enum.Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @property
    def conjugate(self) -> "NormKind":
        return {NormKind.L1: NormKind.LINF, NormKind.L2: NormKind.L2, NormKind.LINF: NormKind.L1}[self]


def _lp_norm(kind: NormKind, x: np.ndarray) -> np.ndarray:
    if kind is NormKind.L1:
        return np.sum(np.abs(x), axis=-1)
    if kind is NormKind.L2:
        return np.sqrt(np.sum(x * x, axis=-1))
    return np.max(np.abs(x), axis=-1)


@dataclass(frozen=True)
class Space:
    """R^dim equipped with an l1, l2 or l-infinity norm.

    Parameters
    ----------
    dim : int
        Dimension, at least 1.
    norm_kind : NormKind
        Which norm the space carries.
    tol : float
        Arithmetic comparison tolerance, in ``(0, 1e-3)``.
    """

    dim: int
    norm_kind: NormKind = NormKind.L2
    tol: float = 1e-9

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise InvalidInput(f"dim must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "norm_kind", NormKind(self.norm_kind))
        if not 0.0 < self.tol < 1e-3:
            raise InvalidInput(f"tol must lie in (0, 1e-3), got {self.tol!r}")

    # -- validation -----------------------------------------------------------

    def point(self, x) -> np.ndarray:
        """Coerce ``x`` to a float array whose last axis has length ``dim``."""
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 0 or arr.shape[-1] != self.dim:
            raise InvalidInput(f"expected last axis of length {self.dim}, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInput("coordinates must be finite")
        return arr

    functional = point

    # -- norms ----------------------------------------------------------------

    def norm(self, x) -> np.ndarray | float:
        out = _lp_norm(self.norm_kind, self.point(x))
        return float(out) if np.ndim(out) == 0 else out

    def dual_norm(self, f) -> np.ndarray | float:
        """Operator norm of ``f``; l1 pairs with l-infinity, l2 with itself."""
        out = _lp_norm(self.norm_kind.conjugate, self.functional(f))
        return float(out) if np.ndim(out) == 0 else out

    def normalize(self, x) -> np.ndarray:
        x = self.point(x)
        n = _lp_norm(self.norm_kind, x)
        if np.any(n == 0):
            raise InvalidInput("cannot normalize the zero vector")
        return x / n[..., None] if x.ndim > 1 else x / n

    # -- functionals ----------------------------------------------------------

    def p_sublinear(self, f, alpha: float, x) -> np.ndarray | float:
        """``f(x) + alpha * ||x||``."""
        if alpha < 0:
            raise InvalidInput(f"alpha must be nonnegative, got {alpha}")
        x = self.point(x)
        out = x @ self.functional(f) + alpha * _lp_norm(self.norm_kind, x)
        return float(out) if np.ndim(out) == 0 else out

    def peak_direction(self, f) -> np.ndarray:
        """A unit vector ``u`` with ``f(u) = ||f||_*``."""
        f = self.functional(f)
        if not np.any(f):
            raise InvalidInput("zero functional has no peak direction")
        if self.norm_kind is NormKind.L2:
            g = f / np.max(np.abs(f))  # avoids underflow for tiny f
            return g / np.linalg.norm(g)
        if self.norm_kind is NormKind.L1:
            i = int(np.argmax(np.abs(f)))
            u = np.zeros(self.dim)
            u[i] = np.sign(f[i])
            return u
        return np.sign(f)

    # -- sampling -------------------------------------------------------------

    def sample_sphere(self, n: int, seed=None) -> np.ndarray:
        """``n`` points of the unit sphere, deterministic for a fixed seed.

        Gaussian directions renormalized in this space's norm: the support is
        the whole sphere, the measure is not uniform.
        """
        if n < 1:
            raise InvalidInput("n must be positive")
        rng = np.random.default_rng(seed)
        z = rng.standard_normal((n, self.dim))
        z[_lp_norm(self.norm_kind, z) == 0] = 1.0
        return z / _lp_norm(self.norm_kind, z)[:, None]

    def sample_ball(self, n: int, seed=None) -> np.ndarray:
        rng = np.random.default_rng(seed)
        u = self.sample_sphere(n, rng)
        r = rng.random(n) ** (1.0 / self.dim)
        return u * r[:, None]


def evaluate(f, x) -> np.ndarray | float:
    """Pairing ``f(x)``; batches of points are allowed on the last axis."""
    f = np.asarray(f, dtype=float)
    x = np.asarray(x, dtype=float)
    if f.ndim != 1 or x.shape[-1] != f.shape[0]:
        raise InvalidInput(f"dimension mismatch: functional {f.shape} vs point {x.shape}")
    out = x @ f
    return float(out) if np.ndim(out) == 0 else out


def norm(space: Space, x):
    return space.norm(x)


def dual_norm(space: Space, f):
    return space.dual_norm(f)


def p_sublinear(space: Space, f, alpha: float, x):
    return space.p_sublinear(f, alpha, x)


def sample_sphere(space: Space, n: int, seed=None) -> np.ndarray:
    return space.sample_sphere(n, seed)
