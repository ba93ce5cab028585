"""Scale schedules and the perturbation pipeline ``B -> P = BH -> A = PS``.

Distances to ``Y`` are agreement radii: ``d(x, Y) = RHO * 2**-radius``.
Space scales ``delta_k`` are stored the same way, as integer radii ``N_k``,
because the constraints on them force doubly exponentially small values.
"""

from __future__ import annotations

import decimal
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import mpmath
import numpy as np

from . import words
from .cocycle import CocycleMap, Observable, log_norm_trace, window_abs_theta
from .cone import BundleResult, invariant_direction
from .subshift import (INF, LogDistance, OutOfWindowError, PointWindow, dist_to_Y,
                       point_at_radius)
from .words import DEFAULT_PARAMS, WordParams

__all__ = [
    "ScaleSchedule", "ScheduleCheck", "NotAchievableError", "ShellNotMaterializableError",
    "factorial_time_scales", "build_time_scales", "build_space_scales",
    "check_schedule", "measure_eps", "default_schedule", "lambda_hat",
    "ModulusPhi", "TauFunction", "interpolated_birkhoff_S", "Z_function",
    "Perturbation", "OrbitData", "make_S", "MkCheck", "verify_mk_property",
    "key_estimate_sweep", "r_decay_sweep", "POSITION_CAP",
]

LN2 = math.log(2.0)
LOG2E = 1.0 / LN2
# 0.6931471805599453 < ln 2 = 0.69314718055994530941...
LN2_LOWER = Fraction(6931471805599453, 10 ** 16)
POSITION_CAP = 10 ** 11


class NotAchievableError(RuntimeError):
    def __init__(self, level: int, best_slack: float):
        super().__init__(f"time scale {level} not achievable at this sample size "
                         f"(best slack {best_slack:.4g})")
        self.level = level
        self.best_slack = best_slack


class ShellNotMaterializableError(ValueError):
    pass


def lambda_hat(scale: float = 1.0, params: WordParams = DEFAULT_PARAMS, K: int = 6) -> float:
    """Target exponent ``scale * theta(e_K) / |e_K|``."""
    return scale * words.theta_of_elementary(K, params) / words.length_of(K, params)


# --------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class ScaleSchedule:
    """Time scales ``M_k`` and agreement radii ``N_k`` (``delta_k = RHO 2^-N_k``).

    Lists are 1-indexed through ``m(k)``, ``n(k)`` and ``epsilon(k)``.
    ``eps[k-1]`` is the measured uniform Birkhoff deviation at time scale
    ``M_k`` (``nan`` where the sample is too short).
    """

    M: tuple
    N: tuple
    eps: tuple = ()
    name: str = "custom"

    def m(self, k: int) -> int:
        return self.M[k - 1]

    def n(self, k: int) -> int:
        return self.N[k - 1]

    def epsilon(self, k: int) -> float:
        return self.eps[k - 1] if k - 1 < len(self.eps) else math.nan

    @property
    def levels(self) -> int:
        return len(self.N)

    def reachable_shells(self, cap: int = POSITION_CAP) -> list:
        """Shells ``k`` with ``N_{k+1} <= cap`` and ``M_{k+1}`` known."""
        return [k for k in range(1, self.levels) if self.n(k + 1) <= cap and k + 1 <= len(self.M)]

    def to_json(self) -> dict:
        return {"name": self.name, "M": [str(v) for v in self.M],
                "N": [str(v) for v in self.N],
                "eps": [None if math.isnan(e) else e for e in self.eps]}

    @classmethod
    def from_json(cls, data: dict) -> "ScaleSchedule":
        return cls(tuple(int(v) for v in data["M"]), tuple(int(v) for v in data["N"]),
                   tuple(math.nan if e is None else float(e) for e in data.get("eps", [])),
                   data.get("name", "custom"))


def factorial_time_scales(count: int) -> tuple:
    """``M_k = (k+1)!`` for ``k = 1..count``."""
    return tuple(math.factorial(k + 1) for k in range(1, count + 1))


def _ceil_strict(x: mpmath.mpf) -> int:
    """Least integer strictly greater than ``x``."""
    return int(mpmath.floor(x)) + 1


def build_space_scales(M: Sequence[int], levels: Optional[int] = None) -> tuple:
    """Minimal increasing radii ``N_1..N_levels`` satisfying the schedule constraints.

    Needs ``M_1..M_{levels+1}``.  Constraints (all exact):
      N_k >= M_k                                  (equal products up to time M_k)
      N_k >= N_{k-1} + M_{k+1} + 1, k > 1          (Bowen ball at time M_{k+1})
      N_{k+1} > N_k + k M_{k+1} log2(e)
      N_k > e^{M_{k-4}} log2(e) + 4, k > 4
    """
    M = [int(v) for v in M]
    if levels is None:
        levels = len(M) - 1
    if levels + 1 > len(M):
        raise ValueError("need one more time scale than space scales")
    N = []
    for k in range(1, levels + 1):
        lo = M[k - 1]
        if k > 1:
            prev = N[-1]
            lo = max(lo, prev + M[k] + 1, prev + 1)
            with mpmath.workdps(len(str((k - 1) * M[k - 1])) + 40):
                lo = max(lo, prev + _ceil_strict((k - 1) * M[k - 1] * mpmath.log(2) ** -1))
        if k > 4:
            m = M[k - 5]
            with mpmath.workdps(int(m / math.log(10)) + 40):
                lo = max(lo, _ceil_strict(mpmath.exp(m) / mpmath.log(2) + 4))
        N.append(int(lo))
    return tuple(N)


@dataclass(frozen=True)
class ScheduleCheck:
    name: str
    k: int
    passed: bool
    detail: str = ""


def check_schedule(s: ScaleSchedule) -> list:
    """Re-verify every schedule inequality with decimal arithmetic.

    Independent of the mpmath route used by ``build_space_scales``.
    """
    out = []
    M, N = [int(v) for v in s.M], [int(v) for v in s.N]
    ctx = decimal.Context(prec=60)
    ln2 = ctx.ln(decimal.Decimal(2))
    for k in range(1, len(M) - 1):
        a, b, c = M[k - 1], M[k], M[k + 1]
        # c/b > b/a
        out.append(ScheduleCheck("ratio_increasing", k + 1, c * a > b * b))
    for k in range(1, len(N) + 1):
        out.append(ScheduleCheck("radius_positive", k, N[k - 1] >= 0))
        if k <= len(M):
            out.append(ScheduleCheck("equal_products", k, N[k - 1] >= M[k - 1]))
        if k > 1:
            out.append(ScheduleCheck("increasing", k, N[k - 1] > N[k - 2]))
            if k < len(M):
                out.append(ScheduleCheck("bowen", k, N[k - 1] - N[k - 2] - M[k] >= 1,
                                         f"{N[k - 1]} - {N[k - 2]} >= {M[k]} + 1"))
        if k < len(N) and k < len(M):
            lhs = decimal.Decimal(N[k] - N[k - 1]) * ln2
            rhs = decimal.Decimal(k * M[k])
            out.append(ScheduleCheck("radius_gap", k, ctx.compare(lhs, rhs) > 0,
                                     f"({N[k]} - {N[k - 1]}) ln2 > {k}*{M[k]}"))
        if k > 4:
            m = M[k - 5]
            prec = int(m / math.log(10)) + 60
            big = decimal.Context(prec=prec)
            rhs = big.add(big.divide(big.exp(decimal.Decimal(m)), big.ln(decimal.Decimal(2))),
                          decimal.Decimal(4))
            out.append(ScheduleCheck("anchors", k, big.compare(decimal.Decimal(N[k - 1]), rhs) > 0,
                                     f"N_{k} > e^{m} log2e + 4"))
    return out


def _host(params: WordParams, K_sample: int) -> np.ndarray:
    return words.letters_range(K_sample + 1, 0, words.length_of(K_sample + 1, params), params)


def _growth_table(host: np.ndarray, m: int, scale: float) -> np.ndarray:
    """``(1/m) log ||B^(m)(T^i y)||`` for every start ``i`` in the host word."""
    return scale * window_abs_theta(host, m).astype(float) / m


def _uniform_deviation(g: np.ndarray, offsets: np.ndarray, N_min: int, lam0: float,
                       n_grid: int = 8) -> tuple:
    """(min avg - lam0, max |avg - lam0|) over ``offsets`` and a geometric grid
    of lengths ``N >= N_min`` that fit the table."""
    prefix = np.concatenate([[0.0], np.cumsum(g)])
    room = len(g) - int(offsets.max())
    if N_min > room:
        return math.nan, math.nan
    Ns = np.unique(np.geomspace(max(N_min, 1), room, n_grid).astype(np.int64))
    lo, dev = math.inf, 0.0
    for Nv in Ns:
        avg = (prefix[offsets + Nv] - prefix[offsets]) / Nv
        lo = min(lo, float(avg.min()) - lam0)
        dev = max(dev, float(np.max(np.abs(avg - lam0))))
    return lo, dev


def measure_eps(M: Sequence[int], scale: float = 1.0, params: WordParams = DEFAULT_PARAMS,
                K_sample: int = 5, stride: int = 1, lam0: Optional[float] = None) -> tuple:
    """Measured ``eps_k``: max over sampled ``y`` and ``N >= M_{k+1}/2`` of
    ``|(1/N) sum_{i<N} (1/M_k) log ||B^(M_k)(T^i y)|| - lam0|``."""
    lam0 = lambda_hat(scale, params) if lam0 is None else lam0
    host = _host(params, K_sample)
    offsets = np.arange(0, words.length_of(K_sample, params), stride)
    out = []
    for k in range(1, len(M)):
        m = int(M[k - 1])
        if m >= len(host) // 2:
            out.append(math.nan)
            continue
        g = _growth_table(host, m, scale)
        out.append(_uniform_deviation(g, offsets, -(-int(M[k]) // 2), lam0)[1])
    return tuple(out)


def build_time_scales(scale: float = 1.0, params: WordParams = DEFAULT_PARAMS,
                      K_sample: int = 5, eps_targets: Optional[Sequence[float]] = None,
                      levels: int = 7, stride: int = 1, lam0: Optional[float] = None) -> tuple:
    """Greedy time scales for the Walters cocycle, checked over the sample.

    ``M_1``: least ``n`` whose mean growth is ``>= lam0 - 1``.  ``M_{k+1}``:
    least value above ``(k+1) M_k`` (and keeping ``M_{k+1}/M_k`` increasing)
    such that every sampled uniform average at time scale ``M_k`` over
    ``N >= M_{k+1}/2`` steps exceeds ``lam0 - eps_targets[k]``, and the mean
    growth at ``M_{k+1}`` exceeds ``lam0 - 1/(k+1)``.
    Returns ``(M, eps)`` with ``eps`` the measured two-sided deviations.
    """
    lam0 = lambda_hat(scale, params) if lam0 is None else lam0
    host = _host(params, K_sample)
    offsets = np.arange(0, words.length_of(K_sample, params), stride)

    def target(k):
        if eps_targets is not None and k - 1 < len(eps_targets):
            return float(eps_targets[k - 1])
        return 2.0 / k

    def mean_growth(n):
        return float(_growth_table(host, n, scale)[offsets].mean())

    m1 = 1
    while mean_growth(m1) < lam0 - 1.0:
        m1 += 1
    M = [m1]
    for k in range(1, levels):
        g = _growth_table(host, M[-1], scale)
        cand = (k + 1) * M[-1] + 1
        if k > 1:
            cand = max(cand, (M[-1] * M[-1]) // M[-2] + 1)
        best = -math.inf
        while True:
            if cand // 2 > len(host) - int(offsets.max()):
                raise NotAchievableError(k + 1, best)
            lo, _ = _uniform_deviation(g, offsets, -(-cand // 2), lam0)
            best = max(best, lo + target(k))
            if lo > -target(k) and mean_growth(cand) > lam0 - 1.0 / (k + 1):
                break
            cand = cand + max(1, cand // 4)
        M.append(cand)
    eps = measure_eps(M, scale, params, K_sample, stride, lam0)
    return tuple(M), eps


def default_schedule(count: int = 9, levels: int = 8, scale: float = 1.0,
                     params: WordParams = DEFAULT_PARAMS, K_sample: int = 5,
                     name: str = "factorial") -> ScaleSchedule:
    """Factorial time scales with minimal space scales and measured eps."""
    if name == "factorial":
        M = factorial_time_scales(count)
        eps = measure_eps(M, scale, params, K_sample)
    elif name == "greedy":
        M, eps = build_time_scales(scale, params, K_sample, levels=count)
    else:
        raise ValueError(f"unknown schedule {name!r}")
    N = build_space_scales(M, min(levels, len(M) - 1))
    return ScaleSchedule(tuple(M), N, tuple(eps), name)


# --------------------------------------------------------------------------
# modulus and slow time


class ModulusPhi:
    """Increasing modulus ``phi(d)`` evaluated in the coordinate
    ``s = 1/(-log d)``; piecewise affine through the anchors
    ``(0, 0)``, ``(s_k, e^{-M_{k-4}})`` for ``k > 4`` and ``(1/ln 10, 1/2)``.

    Anchors whose ``s`` or value would underflow a double are dropped.
    """

    def __init__(self, schedule: ScaleSchedule):
        self.schedule = schedule
        pts = {}
        self.anchor_radii = {}
        for k in range(5, schedule.levels + 1):
            if k - 4 > len(schedule.M):
                break
            m = schedule.m(k - 4)
            val = math.exp(-m) if m < 700 else 0.0
            s = 1.0 / ((schedule.n(k) + 4) * LN2)
            if val <= 1e-300 or s <= 1e-300:
                continue
            pts[s] = val
            self.anchor_radii[schedule.n(k)] = val
        pts[0.0] = 0.0
        pts[1.0 / math.log(10.0)] = 0.5
        xs = sorted(pts)
        self.s_anchors = np.array(xs)
        self.values = np.array([pts[x] for x in xs])

    def psi(self, s: float) -> float:
        if s < 0 or s > self.s_anchors[-1]:
            raise ValueError("s outside [0, 1/ln 10]")
        return float(np.interp(s, self.s_anchors, self.values))

    def at_radius(self, radius) -> float:
        """``phi(RHO * 2**-radius)``; exact at anchor radii, 0 on ``Y``."""
        if radius == INF:
            return 0.0
        radius = int(radius)
        if radius in self.anchor_radii:
            return self.anchor_radii[radius]
        return self.psi(1.0 / ((radius + 4) * LN2))

    def __call__(self, d: LogDistance) -> float:
        return self.at_radius(d.radius)

    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.values) > 0) and np.all(np.diff(self.s_anchors) > 0))

    def exact_anchors(self, dps: int = 60) -> list:
        """Anchors as ``(s, value)`` mpmath pairs, including dropped ones."""
        sch = self.schedule
        with mpmath.workdps(dps):
            pts = [(mpmath.mpf(0), mpmath.mpf(0))]
            for k in range(sch.levels, 4, -1):
                if k - 4 > len(sch.M):
                    continue
                pts.append((1 / ((sch.n(k) + 4) * mpmath.log(2)), mpmath.exp(-sch.m(k - 4))))
            pts.append((1 / mpmath.log(10), mpmath.mpf(1) / 2))
        return pts

    def explosion_holds(self, per_segment: int = 200, dps: int = 60) -> bool:
        """``psi(s) > s`` on ``(0, 1/ln 10]``, in high precision.

        The interpolant is affine on each segment, so checking the anchors
        decides it; a dense sample of every segment is checked as well.
        """
        pts = self.exact_anchors(dps)
        with mpmath.workdps(dps):
            for (s0, v0), (s1, v1) in zip(pts, pts[1:]):
                if not v1 > s1:
                    return False
                for j in range(1, per_segment + 1):
                    s = s0 + (s1 - s0) * j / per_segment
                    v = v0 + (v1 - v0) * (s - s0) / (s1 - s0)
                    if not v > s:
                        return False
        return True


class TauFunction:
    """Slow time ``tau(x)``: piecewise affine in ``sigma = -log d(x, Y)`` with
    anchors ``(ln 10, 1)`` and ``((N_k + 4) ln 2, M_k)``; the last slope
    continues past the final anchor."""

    def __init__(self, schedule: ScaleSchedule):
        self.schedule = schedule
        ks = range(1, min(schedule.levels, len(schedule.M)) + 1)
        self.sigmas = np.array([math.log(10.0)] + [(schedule.n(k) + 4) * LN2 for k in ks])
        self.values = np.array([1.0] + [float(schedule.m(k)) for k in ks])
        self.anchor_radii = {schedule.n(k): float(schedule.m(k)) for k in ks}

    def at_radius(self, radius) -> float:
        if radius == INF:
            raise ValueError("tau is undefined on Y")
        radius = int(radius)
        if radius in self.anchor_radii:
            return self.anchor_radii[radius]
        sigma = (radius + 4) * LN2
        if sigma > self.sigmas[-1]:
            slope = (self.values[-1] - self.values[-2]) / (self.sigmas[-1] - self.sigmas[-2])
            return float(self.values[-1] + slope * (sigma - self.sigmas[-1]))
        return float(np.interp(sigma, self.sigmas, self.values))

    def __call__(self, d: LogDistance) -> float:
        return self.at_radius(d.radius)

    def slope_checks(self) -> list:
        """Exact check ``(M_{k+1} - M_k) k < (N_{k+1} - N_k) ln 2`` per ``k``."""
        s = self.schedule
        out = []
        for k in range(1, min(s.levels, len(s.M))):
            lhs = Fraction((s.m(k + 1) - s.m(k)) * k)
            rhs = (s.n(k + 1) - s.n(k)) * LN2_LOWER
            out.append((k, lhs < rhs))
        return out


# --------------------------------------------------------------------------
# interpolated Birkhoff sums


def _fvalues(f, x, count: int) -> np.ndarray:
    if isinstance(f, Observable):
        return f.values(x, count)
    return np.asarray(f, dtype=float)


def interpolated_birkhoff_S(f, x=None, t: float = 0.0) -> float:
    """``S_t = f_0 + ... + f_{floor(t)-1} + (t - floor t) f_{floor t}``.

    ``f`` is either an ``Observable`` (evaluated along the orbit of ``x``)
    or the sequence ``f(T^i x)`` itself.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    n = math.floor(t)
    frac = t - n
    vals = _fvalues(f, x, n + 1)
    need = n + (1 if frac > 0 else 0)
    if len(vals) < need:
        raise OutOfWindowError(f"{need} orbit values needed, {len(vals)} given")
    total = float(np.sum(vals[:n]))
    if frac > 0:
        total += frac * float(vals[n])
    return total


def Z_function(f, x=None, t: float = 1.0) -> float:
    """``Z_t = sum_i (1 - (i+1)/t)^+ f(T^i x)``; terms vanish for ``i >= t - 1``."""
    if t <= 0:
        raise ValueError("t must be positive")
    count = max(0, math.ceil(t) - 1)
    if count == 0:
        return 0.0
    vals = _fvalues(f, x, count)
    if len(vals) < count:
        raise OutOfWindowError(f"{count} orbit values needed, {len(vals)} given")
    coef = 1.0 - np.arange(1, count + 1) / t
    return float(np.dot(coef, vals[:count]))


# --------------------------------------------------------------------------
# the pipeline


def make_S(u: np.ndarray, r: float) -> np.ndarray:
    """Symmetric ``S`` with ``S u = e^{-r} u`` and ``S u_perp = e^{r} u_perp``.

    This sign makes ``A u(x) = e^{lam0 + g(Tx) - g(x)} u(Tx)`` hold for
    ``A = P S`` when ``f = g(Tx) - g(x) + r``.
    """
    u = np.asarray(u, dtype=float) / np.linalg.norm(u)
    w = np.array([-u[1], u[0]])
    return math.exp(-r) * np.outer(u, u) + math.exp(r) * np.outer(w, w)


@dataclass
class OrbitData:
    """Pipeline quantities along ``x, Tx, ..., T^{n} x``.

    Arrays of length ``n + 1`` except ``f``/``P``/``u`` which extend as far as
    ``g`` needed them.  ``A[i]``, ``S[i]`` and ``r[i]`` are for ``i < n``.
    """

    n: int
    radius: list
    theta: np.ndarray
    P: np.ndarray
    u: np.ndarray
    f: np.ndarray
    tau: np.ndarray
    g: np.ndarray
    r: np.ndarray
    r_bound: np.ndarray
    S: np.ndarray
    A: np.ndarray
    bundle: Optional[BundleResult]
    on_Y: bool = False


class Perturbation:
    """Positive perturbation ``P = B H`` and final map ``A = P S`` of ``B``."""

    def __init__(self, B: CocycleMap, schedule: ScaleSchedule,
                 params: WordParams = DEFAULT_PARAMS, lam0: Optional[float] = None,
                 K: int = 6, depth_max: int = 1000, tol: float = 1e-12):
        self.B = B
        self.schedule = schedule
        self.params = params
        self.K = K
        scale = B.walters_scale if B.walters_scale is not None else 1.0
        self.lam0 = lambda_hat(scale, params, K) if lam0 is None else float(lam0)
        self.phi = ModulusPhi(schedule)
        self.tau = TauFunction(schedule)
        self.depth_max = depth_max
        self.tol = tol
        self.P_map = CocycleMap(self.P, 0, self._P_batch, f"positive({B.name})")
        self.A_map = CocycleMap(self.final_A, 0, self._A_batch, f"final({B.name})")

    # -- pointwise pieces

    def radius(self, x: PointWindow) -> LogDistance:
        return dist_to_Y(x, self.params, self.K)

    def theta(self, x: PointWindow) -> float:
        return self.phi(self.radius(x))

    @staticmethod
    def H_of(theta: float) -> np.ndarray:
        if theta == 0:
            return np.eye(2)
        c, s = math.cosh(theta), math.sinh(theta)
        return np.array([[c, s], [s, c]])

    def theta_H_P(self, x: PointWindow) -> tuple:
        th = self.theta(x)
        H = self.H_of(th)
        P = self.B(x) if th == 0 else self.B(x) @ H
        return th, H, P

    def P(self, x: PointWindow) -> np.ndarray:
        return self.theta_H_P(x)[2]

    def _thetas(self, x: PointWindow, n: int) -> np.ndarray:
        if x.in_Y:
            return np.zeros(n)
        return np.array([self.theta(x.shift(i) if i else x) for i in range(n)])

    def _P_from(self, Bv: np.ndarray, th: np.ndarray) -> np.ndarray:
        out = np.array(Bv, dtype=float, copy=True)
        nz = th != 0
        if np.any(nz):
            c, s = np.cosh(th[nz]), np.sinh(th[nz])
            H = np.empty((int(nz.sum()), 2, 2))
            H[:, 0, 0] = H[:, 1, 1] = c
            H[:, 0, 1] = H[:, 1, 0] = s
            out[nz] = np.einsum("nij,njk->nik", Bv[nz], H)
        return out

    def _P_batch(self, x: PointWindow, n: int) -> np.ndarray:
        return self._P_from(self.B.values(x, n), self._thetas(x, n))

    def bundle(self, x: PointWindow, depth_max: Optional[int] = None) -> BundleResult:
        return invariant_direction(self.P_map, x, self.lam0,
                                   depth_max or self.depth_max, self.tol)

    # -- orbit pipeline

    def orbit(self, x: PointWindow, n: int, depth_max: Optional[int] = None) -> OrbitData:
        """``u, f, tau, g, r, S, A`` along the first ``n`` steps of the orbit."""
        if x.in_Y:
            Bv = self.B.values(x, n)
            z = np.zeros(n)
            eye = np.broadcast_to(np.eye(2), (n, 2, 2)).copy()
            return OrbitData(n, [LogDistance(INF)] * (n + 1), np.zeros(n), Bv,
                             np.full((n + 1, 2), np.nan), np.full(n, np.nan),
                             np.full(n + 1, np.inf), np.full(n + 1, np.nan), z, z, eye,
                             np.array(Bv, copy=True), None, True)
        radius = [self.radius(x.shift(i) if i else x) for i in range(n + 1)]
        tau = np.array([self.tau(d) for d in radius])
        L = int(max(i + math.ceil(tau[i]) for i in range(n + 1))) + 1
        th = np.array([self.phi(d) for d in radius]
                      + [self.theta(x.shift(i)) for i in range(n + 1, L)])
        Pv = self._P_from(self.B.values(x, L), th)
        bundle = self.bundle(x, depth_max)
        u = np.empty((L + 1, 2))
        f = np.empty(L)
        u[0] = bundle.u
        for i in range(L):
            w = Pv[i] @ u[i]
            nw = float(np.linalg.norm(w))
            f[i] = math.log(nw) - self.lam0
            u[i + 1] = w / nw
        g = np.array([-Z_function(f[i:], t=tau[i]) for i in range(n + 1)])
        r = f[:n] + g[:n] - g[1:]
        r_bound = np.empty(n)
        for i in range(n):
            t0, t1 = tau[i], tau[i + 1]
            S_t = interpolated_birkhoff_S(f[i:], t=t0)
            span = f[i + 1:i + 1 + math.ceil(max(t0, t1))]
            fmax = float(np.max(np.abs(span))) if span.size else 0.0
            r_bound[i] = abs(S_t / t0) + fmax * abs(t1 - t0)
        S = np.array([make_S(u[i], r[i]) for i in range(n)])
        A = np.einsum("nij,njk->nik", Pv[:n], S)
        return OrbitData(n, radius, th, Pv, u, f, tau, g, r, r_bound, S, A, bundle)

    def final_A(self, x: PointWindow) -> np.ndarray:
        if self.radius(x).is_zero:
            return self.B(x)
        return self.orbit(x, 1).A[0]

    def _A_batch(self, x: PointWindow, n: int) -> np.ndarray:
        return self.orbit(x, n).A

    def g_and_r(self, x: PointWindow) -> tuple:
        """``(g(x), r(x), proof bound on |r(x)|)``; ``(nan, 0, 0)`` on ``Y``."""
        if self.radius(x).is_zero:
            return math.nan, 0.0, 0.0
        o = self.orbit(x, 1)
        return float(o.g[0]), float(o.r[0]), float(o.r_bound[0])

    def iterated_identity_residual(self, x: PointWindow, n: int,
                                   data: Optional[OrbitData] = None) -> float:
        """Relative residual of ``A^(n)(x) u(x) = e^{n lam0 + g(T^n x) - g(x)} u(T^n x)``."""
        o = data if data is not None else self.orbit(x, n)
        v = o.u[0].copy()
        log_scale = 0.0
        for i in range(n):
            v = o.A[i] @ v
            s = float(np.linalg.norm(v))
            v /= s
            log_scale += math.log(s)
        expo = n * self.lam0 + o.g[n] - o.g[0]
        return float(np.linalg.norm(math.exp(log_scale - expo) * v - o.u[n]))


# --------------------------------------------------------------------------
# verification sweeps


@dataclass
class MkCheck:
    y: int
    n: int
    q: int
    r: int
    s: int
    value: float
    eps_needed: float  # lam0 - value; the property holds for any eps above this


def verify_mk_property(schedule: ScaleSchedule, k: int, samples: int,
                       rng: np.random.Generator, scale: float = 1.0,
                       params: WordParams = DEFAULT_PARAMS, host_level: int = 7,
                       n_factor: int = 4, lam0: Optional[float] = None) -> list:
    """Search all decompositions ``n = r + q M_k + s`` (``q > 0``, ``|r|, |s| < M_k``)
    for random ``y`` in ``Y`` and ``n >= M_{k+1}``; keep the best average of
    ``(1/M_k) log ||B^(M_k)||`` over the ``q`` blocks."""
    lam0 = lambda_hat(scale, params) if lam0 is None else lam0
    m, m_next = schedule.m(k), schedule.m(k + 1)
    host_len = words.length_of(host_level, params)
    out = []
    for _ in range(samples):
        n = int(rng.integers(m_next, n_factor * m_next + 1))
        y = int(rng.integers(m, min(host_len - n - 2 * m, POSITION_CAP)))
        seg = words.letters_range(host_level, y - m + 1, y + n + 2 * m, params)
        Lg = scale * window_abs_theta(seg, m).astype(float)  # index j <-> start y - m + 1 + j
        best = None
        q0 = n // m
        for q in (q0 - 1, q0, q0 + 1):
            if q <= 0:
                continue
            for r in range(-m + 1, m):
                s = n - r - q * m
                if abs(s) >= m:
                    continue
                start = r + m - 1
                val = float(Lg[start:start + q * m:m].sum()) / (q * m)
                if best is None or val > best[0]:
                    best = (val, q, r, s)
        val, q, r, s = best
        out.append(MkCheck(y, n, q, r, s, val, lam0 - val))
    return out


def _random_shell_point(pert: Perturbation, k: int, rng: np.random.Generator,
                        orbit_len: int, host_level: int = 7) -> PointWindow:
    s = pert.schedule
    lo, hi = s.n(k), s.n(k + 1)
    if hi > POSITION_CAP:
        raise ShellNotMaterializableError(f"shell {k} needs radius {hi}")
    R = int(rng.integers(lo, hi + 1))
    host_len = words.length_of(host_level, pert.params)
    margin = R + orbit_len + 2 * pert.depth_max + 64
    if 2 * margin >= host_len:
        raise ShellNotMaterializableError(f"shell {k} does not fit in e_{host_level}")
    pos = int(rng.integers(margin, host_len - margin))
    return point_at_radius(host_level, pos, R, pert.params, side=1, K=pert.K)


def key_estimate_sweep(pert: Perturbation, k: int, samples: int, rng: np.random.Generator,
                       n_vectors: int = 9, host_level: int = 7) -> list:
    """Deviations ``|(1/n) log ||P^(n)(x) v|| - lam0|`` for ``x`` in shell ``k``
    (radius in ``[N_k, N_{k+1}]``) and ``n`` in ``[M_k, M_{k+1}]``.

    One row per sample: radius, worst ``n`` and deviation, plus the upper
    side ``max_n (1/n) log ||P^(n)(x)|| - lam0``.
    """
    s = pert.schedule
    m_lo, m_hi = s.m(k), s.m(k + 1)
    angles = np.linspace(0.0, math.pi / 2, n_vectors)
    V = np.stack([np.cos(angles), np.sin(angles)])
    rows = []
    for _ in range(samples):
        x = _random_shell_point(pert, k, rng, m_hi, host_level)
        Pv = pert.P_map.values(x, m_hi)
        W = V.copy()
        logs = np.zeros(V.shape[1])
        worst = (0.0, m_lo)
        for i in range(m_hi):
            W = Pv[i] @ W
            nrm = np.linalg.norm(W, axis=0)
            W /= nrm
            logs += np.log(nrm)
            n = i + 1
            if n >= m_lo:
                dev = float(np.max(np.abs(logs / n - pert.lam0)))
                if dev > worst[0]:
                    worst = (dev, n)
        upper = log_norm_trace(pert.P_map, x, m_hi)[m_lo - 1:] / np.arange(m_lo, m_hi + 1)
        rows.append({"shell": k, "radius": pert.radius(x).radius, "n": worst[1],
                     "deviation": worst[0], "upper": float(upper.max() - pert.lam0),
                     "bound": s.epsilon(k)})
    return rows


def r_decay_sweep(pert: Perturbation, shells: Sequence[int], per_shell: int,
                  rng: np.random.Generator, host_level: int = 7) -> list:
    """``|r(x)|`` and its proof bound for random points in each shell."""
    rows = []
    for k in shells:
        for _ in range(per_shell):
            x = _random_shell_point(pert, k, rng, pert.schedule.m(k + 1) + 2, host_level)
            o = pert.orbit(x, 1)
            rows.append({"shell": k, "radius": o.radius[0].radius, "r": float(o.r[0]),
                         "bound": float(o.r_bound[0]), "diameter": o.bundle.diameter})
    return rows
