"""Hilbert projective metric on the open positive quadrant.

Rays ``[v1 : v2]`` are stored by the single coordinate ``t = log(v1 / v2)``,
in which the Hilbert metric is ``|t - s|``.  A nonnegative matrix maps the
quadrant into a sector whose Hilbert diameter controls how much it contracts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cocycle import CocycleMap, product

__all__ = [
    "Ray", "DegenerateMatrixError", "OnYError", "NoConvergenceError",
    "hilbert_dist", "cone_diameter", "contraction_coeff", "axis_images",
    "BundleResult", "invariant_direction", "positivity_bound_check",
    "perron_direction",
]


class DegenerateMatrixError(ValueError):
    pass


class OnYError(ValueError):
    """The backward orbit never leaves the boundary of the cone."""


class NoConvergenceError(RuntimeError):
    def __init__(self, depth: int, diameter: float):
        super().__init__(f"cone diameter {diameter:.3g} after {depth} backward steps")
        self.depth = depth
        self.diameter = diameter


@dataclass(frozen=True, order=True)
class Ray:
    t: float

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise ValueError("ray coordinate must be finite")

    @classmethod
    def from_pair(cls, v1: float, v2: float) -> "Ray":
        if not (v1 > 0 and v2 > 0):
            raise ValueError("ray representatives must be strictly positive")
        return cls(math.log(v1) - math.log(v2))

    @classmethod
    def from_vector(cls, v) -> "Ray":
        return cls.from_pair(float(v[0]), float(v[1]))

    def unit_vector(self) -> np.ndarray:
        # (e^{t/2}, e^{-t/2}) rescaled without overflow
        if self.t >= 0:
            v = np.array([1.0, math.exp(-self.t)])
        else:
            v = np.array([math.exp(self.t), 1.0])
        return v / np.linalg.norm(v)

    def image(self, M: np.ndarray) -> "Ray":
        return Ray.from_vector(np.asarray(M) @ self.unit_vector())


def hilbert_dist(r1: Ray, r2: Ray) -> float:
    return abs(r1.t - r2.t)


def _entries(M) -> tuple:
    a, b, c, d = (float(M[0][0]), float(M[0][1]), float(M[1][0]), float(M[1][1]))
    if min(a, b, c, d) < 0:
        raise DegenerateMatrixError("matrix has a negative entry")
    if (a == 0 and b == 0) or (c == 0 and d == 0) or (a == 0 and c == 0) or (b == 0 and d == 0):
        raise DegenerateMatrixError("matrix has a zero row or column")
    return a, b, c, d


def cone_diameter(M, det: Optional[float] = None) -> float:
    """Hilbert diameter of the image of the positive quadrant, ``|log(ad/bc)|``.

    ``det`` may be supplied when it is known more accurately than the
    entries determine it (products of many matrices); then the value is
    computed as ``|log1p(det / bc)|``, which keeps small diameters accurate.
    """
    a, b, c, d = _entries(M)
    if a * d == 0 or b * c == 0:
        return math.inf
    if det is not None:
        ratio = det / (b * c)
        if ratio > -1:
            return abs(math.log1p(ratio))
    return abs(math.log(a) + math.log(d) - math.log(b) - math.log(c))


def axis_images(M) -> tuple:
    """Image rays of the two boundary rays ``[1:0]`` and ``[0:1]``."""
    a, b, c, d = _entries(M)
    return Ray.from_pair(a, c), Ray.from_pair(b, d)


def contraction_coeff(M, det: Optional[float] = None) -> float:
    D = cone_diameter(M, det)
    return 1.0 if math.isinf(D) else math.tanh(D / 4)


def perron_direction(M) -> tuple:
    """Perron eigenvector (unit, positive) and eigenvalue of a positive matrix."""
    a, b, c, d = _entries(M)
    lam = 0.5 * (a + d + math.sqrt((a - d) ** 2 + 4 * b * c))
    # (b, lam - a) and (lam - d, c) both span the eigenline; pick the stable one
    v = np.array([b, lam - a]) if lam - a >= lam - d else np.array([lam - d, c])
    return v / np.linalg.norm(v), lam


@dataclass
class BundleResult:
    ray: Ray
    u: np.ndarray
    f: float
    diameter: float
    depth: int
    converged: bool
    trace: list = field(default_factory=list)  # (depth, diameter, t)

    def residual(self, P_x: np.ndarray, u_next: np.ndarray, lam0: float) -> float:
        return float(np.linalg.norm(P_x @ self.u - math.exp(lam0 + self.f) * u_next))


def invariant_direction(P: CocycleMap, x, lam0: float, depth_max: int = 1000,
                        tol: float = 1e-12, strict: bool = False,
                        block: int = 64, keep_trace: bool = True) -> BundleResult:
    """Direction ``u(x)`` fixed by the backward cone images of ``P``.

    The image of the quadrant under ``P(T^{-1}x) ... P(T^{-n}x)`` is a nested
    sector; iteration stops once its diameter is below ``tol`` or at
    ``depth_max``.  ``u`` is the midpoint ray of the final sector and
    ``f = log ||P(x) u|| - lam0``.
    """
    Q = np.eye(2)
    log_scale = 0.0
    log_det, det_sign = 0.0, 1.0
    trace = []
    diam = math.inf
    depth = 0
    while depth < depth_max:
        count = min(block, depth_max - depth)
        vals = P.values(x.shift(-(depth + count)), count)  # T^{-depth-count} .. T^{-depth-1}
        for j in range(count - 1, -1, -1):
            M = vals[j]
            Q = Q @ M
            s = float(np.max(np.abs(Q)))
            Q /= s
            log_scale += math.log(s)
            dm = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
            if dm == 0:
                raise DegenerateMatrixError("singular cocycle value")
            log_det += math.log(abs(dm))
            det_sign *= math.copysign(1.0, dm)
            depth += 1
            if min(Q[0, 0], Q[0, 1], Q[1, 0], Q[1, 1]) <= 0:
                diam = math.inf
            else:
                det_n = det_sign * math.exp(log_det - 2 * log_scale)
                diam = cone_diameter(Q, det_n)
            if keep_trace:
                t_mid = _mid_t(Q) if math.isfinite(diam) else float("nan")
                trace.append((depth, diam, t_mid))
            if diam < tol:
                break
        if diam < tol:
            break
    if math.isinf(diam):
        raise OnYError("backward products never become strictly positive")
    converged = diam < tol
    if strict and not converged:
        raise NoConvergenceError(depth, diam)
    ray = Ray(_mid_t(Q))
    u = ray.unit_vector()
    f = math.log(float(np.linalg.norm(P(x) @ u))) - lam0
    return BundleResult(ray, u, f, diam, depth, converged, trace)


def _mid_t(Q) -> float:
    t1 = math.log(Q[0, 0]) - math.log(Q[1, 0])
    t2 = math.log(Q[0, 1]) - math.log(Q[1, 1])
    return 0.5 * (t1 + t2)


def positivity_bound_check(P: CocycleMap, B: CocycleMap, x, n: int, theta_x: float,
                           vectors: Optional[Sequence] = None, slack: float = 1e-9) -> bool:
    """``||P^(n)(x) v|| >= theta(x) ||B^(n)(x)|| ||v||`` for nonnegative ``v``.

    Compared in logs; ``slack`` is relative.
    """
    if theta_x <= 0:
        return True
    if vectors is None:
        angles = np.linspace(0.0, math.pi / 2, 33)
        vectors = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    Pn = product(P, x, n)
    Bn = product(B, x, n)
    rhs = math.log(theta_x) + Bn.log_scale
    for v in vectors:
        v = np.asarray(v, dtype=float)
        nv = float(np.linalg.norm(v))
        lhs = Pn.apply_log(v / nv)
        if lhs < rhs + math.log1p(-slack):
            return False
    return True
