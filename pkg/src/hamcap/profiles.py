"""One-dimensional radial profiles: construction, evaluation, and slope equations.

All Hamiltonians in this package are assembled from a radial profile f, a
piecewise-cubic function of one variable with prescribed plateau, parabola,
and transition bands.  Pieces are stored as breakpoint values and derivatives
(cubic Hermite data).  Transition bands are built so that the second
derivative is a continuous piecewise-linear function: each band solves a
two-by-two moment system for its interior curvature knots, which makes f
exactly C^2 while keeping f, f', f'' cheap to evaluate and the sign pattern of
f'' certifiable band by band.

Three families are provided:

* a bump family: a downward parabola cap that either decays straight to zero
  (parameter s >= 1) or passes through a deep plateau at level s (s <= -1);
* a plateau family: a flat positive top that decays to zero (s >= 1) or drops
  through a deep plateau at level s before returning to zero (s <= -1);
* a sharpness profile: a compactly supported bump at height m - delta centered
  at the marked level u whose slopes stay strictly inside m/(R+u) on the left
  and -m/(R-u) on the right, so the slope equation f'(r) = ell has no solution
  when m = R|ell| + u*ell.

The center value of the parametric families is f_s(0) = c + g(s) with
g(s) = s for s >= 1 and g(s) = exp(s - 1) for s < 1, which is positive,
strictly increasing in s, tends to 0 as s -> -infinity and to infinity as
s -> infinity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import InfeasibleSpecError
from .phase_space import PhaseSpaceConfig

#: |f'(root) - slope| after polishing must not exceed this.
ROOT_RESIDUAL_TOL = 1e-10
#: Roots with |f''| below this are flagged degenerate (non-isolated family risk).
DEGENERATE_CURVATURE_TOL = 1e-8
#: Maximum allowed jump of f'' across a breakpoint.
C2_JUMP_TOL = 1e-9


def center_value(s: float, c: float) -> float:
    """Center height f_s(0) = c + g(s), monotone in s with the required limits."""
    g = s if s >= 1.0 else math.exp(s - 1.0)
    return c + g


class ProfileFamily(str, Enum):
    BUMP = "bump"
    PLATEAU = "plateau"


@dataclass(frozen=True)
class ProfileFamilySpec:
    """Parameters selecting one member of a profile family.

    ``geometry`` and ``ell`` are only needed by the slope-root validation
    checks; the shapes themselves depend on (family, s, c) alone.
    """

    family: ProfileFamily
    s: float
    c: float
    geometry: Optional[PhaseSpaceConfig] = None
    ell: int = 1

    def __post_init__(self):
        fam = ProfileFamily(self.family)
        object.__setattr__(self, "family", fam)
        if abs(self.s) < 1.0:
            raise ValueError(f"family parameter needs |s| >= 1, got s={self.s}")


@dataclass(frozen=True)
class SlopeRoot:
    """One solution of f'(r) = slope with its curvature classification."""

    r: float
    second_derivative_sign: int  # -1, 0, +1; 0 marks a degenerate root
    residual: float
    degenerate: bool
    interval: Optional[tuple] = None  # set when f' == slope on a whole band


@dataclass(frozen=True)
class SlopeRoots:
    slope: float
    roots: tuple

    def __iter__(self):
        return iter(self.roots)

    def __len__(self):
        return len(self.roots)

    @property
    def radii(self) -> np.ndarray:
        return np.array([root.r for root in self.roots])


@dataclass(frozen=True)
class RadialProfile:
    """Piecewise-cubic profile given by Hermite data at breakpoints.

    For ``even_symmetric`` profiles only the r >= 0 half is stored; evaluation
    mirrors f(-r) = f(r).  Outside the breakpoint range (and outside
    ``support_radius``) the profile is identically zero.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    even_symmetric: bool
    support_radius: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        xs = np.asarray(self.breakpoints, dtype=float)
        vs = np.asarray(self.values, dtype=float)
        ds = np.asarray(self.derivs, dtype=float)
        if not (xs.ndim == 1 and xs.shape == vs.shape == ds.shape and xs.size >= 2):
            raise ValueError("breakpoints, values, derivs must be matching 1-d arrays")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if self.even_symmetric and abs(xs[0]) > 1e-15:
            raise ValueError("even profiles store the half-line and must start at r=0")
        object.__setattr__(self, "breakpoints", xs)
        object.__setattr__(self, "values", vs)
        object.__setattr__(self, "derivs", ds)
        h = np.diff(xs)
        dv = np.diff(vs)
        a2 = (3.0 * dv / h - 2.0 * ds[:-1] - ds[1:]) / h
        a3 = (-2.0 * dv / h + ds[:-1] + ds[1:]) / h**2
        coeffs = np.stack([vs[:-1], ds[:-1], a2, a3], axis=1)
        object.__setattr__(self, "_coeffs", coeffs)

    # -- evaluation ---------------------------------------------------------

    def _eval(self, r, order: int):
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        x = np.atleast_1d(r).astype(float)
        sign = np.ones_like(x)
        if self.even_symmetric:
            sign = np.sign(x)
            sign[sign == 0] = 1.0
            x = np.abs(x)
        xs = self.breakpoints
        inside = (x >= xs[0]) & (x <= xs[-1])
        idx = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(xs) - 2)
        xi = x - xs[idx]
        c = self._coeffs[idx]
        if order == 0:
            out = c[:, 0] + xi * (c[:, 1] + xi * (c[:, 2] + xi * c[:, 3]))
        elif order == 1:
            out = c[:, 1] + xi * (2.0 * c[:, 2] + xi * 3.0 * c[:, 3])
            if self.even_symmetric:
                out = out * sign
        elif order == 2:
            out = 2.0 * c[:, 2] + 6.0 * xi * c[:, 3]
        else:
            raise ValueError("order must be 0, 1 or 2")
        out = np.where(inside, out, 0.0)
        return float(out[0]) if scalar else out

    def value(self, r):
        return self._eval(r, 0)

    def slope(self, r):
        return self._eval(r, 1)

    def curvature(self, r):
        return self._eval(r, 2)

    def domain(self) -> tuple:
        if self.even_symmetric:
            return (-float(self.breakpoints[-1]), float(self.breakpoints[-1]))
        return (float(self.breakpoints[0]), float(self.breakpoints[-1]))

    def curvature_jumps(self) -> float:
        """Largest |f''| mismatch across interior breakpoints."""
        xs, c = self.breakpoints, self._coeffs
        h = np.diff(xs)
        end_cc = 2.0 * c[:, 2] + 6.0 * h * c[:, 3]
        start_cc = 2.0 * c[:, 2]
        if len(xs) < 3:
            return 0.0
        return float(np.max(np.abs(end_cc[:-1] - start_cc[1:])))

    def curvature_scale(self) -> float:
        """Largest |f''| over the profile (attained at piece endpoints)."""
        xs, c = self.breakpoints, self._coeffs
        h = np.diff(xs)
        end_cc = 2.0 * c[:, 2] + 6.0 * h * c[:, 3]
        start_cc = 2.0 * c[:, 2]
        return float(max(np.max(np.abs(end_cc)), np.max(np.abs(start_cc))))

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        lo, hi = self.domain()
        return json.dumps(
            {
                "domain": [lo, hi],
                "breakpoints": self.breakpoints.tolist(),
                "values": self.values.tolist(),
                "derivatives": self.derivs.tolist(),
                "evenSymmetric": self.even_symmetric,
                "supportRadius": self.support_radius,
                "meta": self.meta,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "RadialProfile":
        data = json.loads(text)
        return cls(
            breakpoints=np.array(data["breakpoints"], dtype=float),
            values=np.array(data["values"], dtype=float),
            derivs=np.array(data["derivatives"], dtype=float),
            even_symmetric=bool(data["evenSymmetric"]),
            support_radius=float(data["supportRadius"]),
            meta=data.get("meta", {}),
        )


# -- construction helpers ----------------------------------------------------


def _band_nodes(x0, x1, v0, d0, c0, v1, d1, c1):
    """C^2 transition band on [x0, x1] matching value, slope, and curvature
    at both ends.

    The second derivative is taken continuous piecewise-linear through knots
    at the interior thirds; the two free knot values are fixed by the slope
    and value increments (first and second moment of f'').  Returns node
    arrays (x, v, d) including both endpoints.
    """
    w = x1 - x0
    if w <= 0:
        raise ValueError("empty band")
    ts = x0 + np.array([0.0, 1.0, 2.0, 3.0]) * (w / 3.0)
    h = w / 3.0

    def moments(g):
        m1 = 0.0
        m2 = 0.0
        for j in range(3):
            a, b = g[j], g[j + 1]
            A = x1 - ts[j]
            m1 += h * (a + b) / 2.0
            m2 += a * (A * h - h * h / 2.0) + (b - a) * (A * h / 2.0 - h * h / 3.0)
        return m1, m2

    base = np.array([c0, 0.0, 0.0, c1])
    m1_0, m2_0 = moments(base)
    m1_1, m2_1 = moments(np.array([0.0, 1.0, 0.0, 0.0]))
    m1_2, m2_2 = moments(np.array([0.0, 0.0, 1.0, 0.0]))
    A = np.array([[m1_1, m1_2], [m2_1, m2_2]])
    rhs = np.array([(d1 - d0) - m1_0, (v1 - v0 - d0 * w) - m2_0])
    g1, g2 = np.linalg.solve(A, rhs)
    g = np.array([c0, g1, g2, c1])

    xs = [ts[0]]
    vs = [v0]
    ds = [d0]
    v, d = v0, d0
    for j in range(3):
        a, b = g[j], g[j + 1]
        v = v + h * d + h * h * (a / 3.0 + b / 6.0)
        d = d + h * (a + b) / 2.0
        xs.append(ts[j + 1])
        vs.append(v)
        ds.append(d)
    scale = max(1.0, abs(v0), abs(v1))
    if abs(vs[-1] - v1) > 1e-9 * scale or abs(ds[-1] - d1) > 1e-9 * scale:
        raise InfeasibleSpecError("band moment system failed to close")
    vs[-1], ds[-1] = v1, d1
    return np.array(xs), np.array(vs), np.array(ds)


class _NodeChain:
    """Accumulates Hermite nodes left to right, merging shared endpoints."""

    def __init__(self, x0, v0, d0):
        self.xs = [float(x0)]
        self.vs = [float(v0)]
        self.ds = [float(d0)]

    def _extend(self, xs, vs, ds):
        if abs(xs[0] - self.xs[-1]) > 1e-12:
            raise ValueError("non-contiguous band")
        self.xs.extend(float(x) for x in xs[1:])
        self.vs.extend(float(v) for v in vs[1:])
        self.ds.extend(float(d) for d in ds[1:])

    def parabola(self, x1, height, nodes=4):
        """Append f(r) = height * (1 - r^2) up to x1 (exact, cubic Hermite)."""
        xs = np.linspace(self.xs[-1], x1, nodes + 1)
        self._extend(xs, height * (1.0 - xs**2), -2.0 * height * xs)

    def constant(self, x1, level):
        self._extend(np.array([self.xs[-1], x1]), np.array([level, level]),
                     np.zeros(2))

    def linear(self, x1, slope):
        v0 = self.vs[-1]
        x0 = self.xs[-1]
        self._extend(np.array([x0, x1]),
                     np.array([v0, v0 + slope * (x1 - x0)]),
                     np.array([slope, slope]))

    def band(self, x1, v1, d1, c1, c0=None):
        """Append a C^2 transition band ending with data (v1, d1, c1).

        ``c0`` defaults to the curvature the previous piece ends with, which
        keeps f'' continuous across the junction.
        """
        if c0 is None:
            c0 = self.end_curvature()
        xs, vs, ds = _band_nodes(self.xs[-1], x1, self.vs[-1], self.ds[-1], c0,
                                 v1, d1, c1)
        self._extend(xs, vs, ds)

    def end_curvature(self):
        if len(self.xs) < 2:
            return 0.0
        h = self.xs[-1] - self.xs[-2]
        dv = self.vs[-1] - self.vs[-2]
        d0, d1 = self.ds[-2], self.ds[-1]
        a2 = (3.0 * dv / h - 2.0 * d0 - d1) / h
        a3 = (-2.0 * dv / h + d0 + d1) / h**2
        return 2.0 * a2 + 6.0 * a3 * h

    def build(self, even, support_radius, meta):
        profile = RadialProfile(
            breakpoints=np.array(self.xs),
            values=np.array(self.vs),
            derivs=np.array(self.ds),
            even_symmetric=even,
            support_radius=float(support_radius),
            meta=meta,
        )
        # the 1e-9 continuity tolerance is relative to the curvature scale;
        # steep bands carry |f''| ~ 1e4 and pure roundoff jumps of ~1e-12 rel
        if profile.curvature_jumps() > C2_JUMP_TOL * max(1.0, profile.curvature_scale()):
            raise InfeasibleSpecError("profile assembly lost C^2 continuity")
        return profile


def build_bump_profile(spec: ProfileFamilySpec) -> RadialProfile:
    """Bump family member: parabola cap, optional deep plateau, compact support.

    For s >= 1 the profile is f(0)(1 - r^2) out to 1 - 1/(4s) and zero past
    1 - 1/(8s).  For s <= -1 the parabola cap holds to 1/(8|s|), the profile
    sits at level s on [1/(4|s|), 1 - 1/(4|s|)], and vanishes past
    1 - 1/(8|s|).  The only critical point with positive value is r = 0.
    """
    spec = _as_spec(spec, ProfileFamily.BUMP)
    if spec.c <= 0:
        raise InfeasibleSpecError(f"bump family needs c > 0, got c={spec.c}")
    s, c = spec.s, spec.c
    F = center_value(s, c)
    meta = {"family": "bump", "s": s, "c": c, "center": F}
    chain = _NodeChain(0.0, F, 0.0)
    if s >= 1.0:
        x0 = 1.0 - 1.0 / (4.0 * s)
        x1 = 1.0 - 1.0 / (8.0 * s)
        chain.parabola(x0, F)
        chain.band(x1, 0.0, 0.0, 0.0, c0=-2.0 * F)
        chain.constant(1.0, 0.0)
        support = x1
    else:
        a = abs(s)
        chain.parabola(1.0 / (8.0 * a), F)
        chain.band(1.0 / (4.0 * a), s, 0.0, 0.0, c0=-2.0 * F)
        chain.constant(1.0 - 1.0 / (4.0 * a), s)
        chain.band(1.0 - 1.0 / (8.0 * a), 0.0, 0.0, 0.0, c0=0.0)
        chain.constant(1.0, 0.0)
        support = 1.0 - 1.0 / (8.0 * a)
    return chain.build(even=True, support_radius=support, meta=meta)


def build_plateau_profile(spec: ProfileFamilySpec) -> RadialProfile:
    """Plateau family member: flat positive top with certified curvature bands.

    For s >= 1: constant f(0) on [0, 1 - 3/(8s)], zero past 1 - 1/(8s), with
    f'' < 0 then > 0 on the two halves of the descent.  For s <= -1 the top
    holds to 1/(8|s|), a symmetric descent reaches the level-s plateau at
    3/(8|s|), and the mirror ascent returns to zero before 1 - 1/(8|s|).
    """
    spec = _as_spec(spec, ProfileFamily.PLATEAU)
    floor = 0.0
    if spec.geometry is not None:
        floor = max(spec.geometry.u * spec.ell, 0.0)
    if spec.c <= floor:
        raise InfeasibleSpecError(
            f"plateau family needs c > max(u*ell, 0) = {floor}, got c={spec.c}"
        )
    s, c = spec.s, spec.c
    F = center_value(s, c)
    meta = {"family": "plateau", "s": s, "c": c, "center": F}
    chain = _NodeChain(0.0, F, 0.0)
    if s >= 1.0:
        chain.constant(1.0 - 3.0 / (8.0 * s), F)
        chain.band(1.0 - 1.0 / (8.0 * s), 0.0, 0.0, 0.0, c0=0.0)
        chain.constant(1.0, 0.0)
        support = 1.0 - 1.0 / (8.0 * s)
    else:
        a = abs(s)
        chain.constant(1.0 / (8.0 * a), F)
        chain.band(3.0 / (8.0 * a), s, 0.0, 0.0, c0=0.0)
        chain.constant(1.0 - 3.0 / (8.0 * a), s)
        chain.band(1.0 - 1.0 / (8.0 * a), 0.0, 0.0, 0.0, c0=0.0)
        chain.constant(1.0, 0.0)
        support = 1.0 - 1.0 / (8.0 * a)
    return chain.build(even=True, support_radius=support, meta=meta)


def build_profile(spec: ProfileFamilySpec) -> RadialProfile:
    spec = ProfileFamilySpec(**spec.__dict__) if not isinstance(spec, ProfileFamilySpec) else spec
    if spec.family is ProfileFamily.BUMP:
        return build_bump_profile(spec)
    return build_plateau_profile(spec)


def _as_spec(spec, family) -> ProfileFamilySpec:
    if not isinstance(spec, ProfileFamilySpec):
        raise TypeError("expected a ProfileFamilySpec")
    if spec.family is not family:
        raise ValueError(f"spec is for family {spec.family}, not {family}")
    return spec


def build_sharpness_profile(geometry: PhaseSpaceConfig, ell: int, a: float,
                            delta: float) -> RadialProfile:
    """Capacity-sharpness bump over the raw annulus coordinate.

    The profile peaks at m - delta near r = u, where m = max(R|ell| + u*ell,
    a + u*ell), stays strictly below the chords from (-R, 0) and (R, 0) to
    (u, m), and keeps f' < m/(R+u) on (-R, u] and f' > -m/(R-u) on [u, R).
    Consequently f'(r) = ell has no solution at all when m = R|ell| + u*ell,
    and all slope-ell orbits have action below a otherwise.
    """
    R, u = geometry.R, geometry.u
    if ell == 0 and not a > 0:
        raise InfeasibleSpecError("ell = 0 requires a > 0 (otherwise the value is 0)")
    m = max(R * abs(ell) + u * ell, a + u * ell)
    if not delta > 0:
        raise InfeasibleSpecError("delta must be positive")
    if delta >= m:
        raise InfeasibleSpecError(f"delta must stay below m={m}, got delta={delta}")

    P = m - delta
    eta = delta / (4.0 * m)
    w_plateau = (delta / (8.0 * m)) * min(R + u, R - u)
    sides = {}
    for side, width in (("left", R + u), ("right", R - u)):
        sigma = m / width
        sigma_eff = sigma * (1.0 - eta)
        beta = min(width * delta / (8.0 * m), P / (2.0 * sigma_eff))
        mid = P / sigma_eff - beta
        sides[side] = (sigma_eff, beta, mid)

    sigL, betaL, midL = sides["left"]
    sigR, betaR, midR = sides["right"]
    r_a = u - w_plateau - 2.0 * betaL - midL
    r_b = u + w_plateau + 2.0 * betaR + midR
    if not (-R < r_a and r_b < R):
        raise InfeasibleSpecError("sharpness bump does not fit inside the annulus")

    chain = _NodeChain((r_a - R) / 2.0, 0.0, 0.0)
    chain.constant(r_a, 0.0)
    chain.band(r_a + betaL, sigL * betaL / 2.0, sigL, 0.0, c0=0.0)
    chain.linear(r_a + betaL + midL, sigL)
    chain.band(u - w_plateau, P, 0.0, 0.0, c0=0.0)
    chain.constant(u + w_plateau, P)
    chain.band(u + w_plateau + betaR, P - sigR * betaR / 2.0, -sigR, 0.0, c0=0.0)
    chain.linear(u + w_plateau + betaR + midR, -sigR)
    chain.band(r_b, 0.0, 0.0, 0.0, c0=0.0)
    chain.constant((r_b + R) / 2.0, 0.0)
    profile = chain.build(
        even=False,
        support_radius=max(abs(r_a), abs(r_b)),
        meta={"family": "sharpness", "m": m, "delta": delta, "a": a, "ell": ell,
              "u": u, "R": R},
    )
    _check_sharpness(profile, geometry, m)
    return profile


def _check_sharpness(profile, geometry, m):
    R, u = geometry.R, geometry.u
    grid = np.linspace(-R + 1e-9, R - 1e-9, 2001)
    f = profile.value(grid)
    fp = profile.slope(grid)
    chord = np.where(grid <= u, (R + grid) / (R + u) * m, (R - grid) / (R - u) * m)
    if np.any(f >= chord):
        raise InfeasibleSpecError("sharpness chord bound violated")
    left = grid <= u
    if np.any(fp[left] >= m / (R + u)) or np.any(fp[~left] <= -m / (R - u)):
        raise InfeasibleSpecError("sharpness slope bound violated")


def profile_from_function(fn, dfn, breakpoints, even_symmetric=False,
                          support_radius=None, meta=None) -> RadialProfile:
    """Sample an explicit (f, f') pair into a Hermite profile (exact for cubics)."""
    xs = np.asarray(breakpoints, dtype=float)
    vs = np.array([fn(x) for x in xs], dtype=float)
    ds = np.array([dfn(x) for x in xs], dtype=float)
    if support_radius is None:
        support_radius = float(np.max(np.abs(xs)))
    return RadialProfile(xs, vs, ds, even_symmetric, support_radius,
                         meta=meta or {"family": "custom"})


# -- slope equations ---------------------------------------------------------


def _two_sided_grid(profile: RadialProfile, lo, hi, per_piece=64):
    """Refined evaluation grid over [lo, hi] aligned with piece boundaries."""
    xs = profile.breakpoints
    if profile.even_symmetric:
        xs = np.concatenate([-xs[::-1], xs[1:]])
    knots = xs[(xs >= lo - 1e-15) & (xs <= hi + 1e-15)]
    knots = np.unique(np.concatenate([[lo], knots, [hi]]))
    pieces = []
    for aa, bb in zip(knots[:-1], knots[1:]):
        pieces.append(np.linspace(aa, bb, per_piece + 1)[:-1])
    pieces.append(np.array([hi]))
    return np.concatenate(pieces)


def solve_slope(profile: RadialProfile, slope: float, lo=None, hi=None) -> SlopeRoots:
    """All solutions of f'(r) = slope on [lo, hi] (default: the full domain).

    Roots are bracketed by sign changes on a refined per-piece grid and
    polished by Brent plus a Newton step on f''; bands where f' equals the
    slope identically are collapsed to a single degenerate interval root, and
    isolated tangencies (|f' - slope| dipping below 1e-8 without a sign
    change) are reported as degenerate roots.
    """
    dom_lo, dom_hi = profile.domain()
    lo = dom_lo if lo is None else max(lo, dom_lo)
    hi = dom_hi if hi is None else min(hi, dom_hi)
    if hi <= lo:
        return SlopeRoots(slope=slope, roots=())
    grid = _two_sided_grid(profile, lo, hi)
    g = profile.slope(grid) - slope

    roots = []

    def add_root(r, interval=None):
        resid = abs(profile.slope(r) - slope)
        curv = profile.curvature(r)
        degenerate = abs(curv) < DEGENERATE_CURVATURE_TOL or interval is not None
        sign = 0 if degenerate else (1 if curv > 0 else -1)
        roots.append(SlopeRoot(r=float(r), second_derivative_sign=sign,
                               residual=float(resid), degenerate=degenerate,
                               interval=interval))

    # maximal runs where f' - slope vanishes identically (plateau pieces)
    flat = np.abs(g) < 1e-12
    i = 0
    covered = np.zeros(len(grid), dtype=bool)
    while i < len(grid):
        if flat[i]:
            j = i
            while j + 1 < len(grid) and flat[j + 1]:
                j += 1
            if j > i:  # a genuine interval, not a single grid hit
                add_root(0.5 * (grid[i] + grid[j]), interval=(float(grid[i]),
                                                              float(grid[j])))
                covered[i:j + 1] = True
            i = j + 1
        else:
            i += 1

    def fprime(r):
        return profile.slope(r) - slope

    for i in range(len(grid) - 1):
        if covered[i] or covered[i + 1]:
            continue
        a, b = grid[i], grid[i + 1]
        ga, gb = g[i], g[i + 1]
        if ga == 0.0:
            add_root(a)
            continue
        if ga * gb < 0.0:
            r = brentq(fprime, a, b, xtol=1e-14, rtol=8.9e-16)
            curv = profile.curvature(r)
            if abs(curv) > 1e-3:
                r = r - (profile.slope(r) - slope) / curv
            add_root(r)
    if not covered[-1] and g[-1] == 0.0 and (len(g) < 2 or g[-2] != 0.0):
        add_root(grid[-1])

    # isolated tangencies: local minima of |g| below threshold, no sign change
    absg = np.abs(g)
    for i in range(1, len(grid) - 1):
        if covered[i] or absg[i] >= DEGENERATE_CURVATURE_TOL:
            continue
        if absg[i] <= absg[i - 1] and absg[i] <= absg[i + 1]:
            if any(abs(root.r - grid[i]) < 1e-6 for root in roots):
                continue
            res = minimize_scalar(lambda r: fprime(r) ** 2,
                                  bounds=(grid[i - 1], grid[i + 1]),
                                  method="bounded")
            if abs(fprime(res.x)) < DEGENERATE_CURVATURE_TOL:
                add_root(float(res.x))

    roots.sort(key=lambda root: root.r)
    deduped = []
    for root in roots:
        if deduped and abs(root.r - deduped[-1].r) < 1e-12:
            continue
        deduped.append(root)
    return SlopeRoots(slope=float(slope), roots=tuple(deduped))


# -- property validation -----------------------------------------------------


@dataclass(frozen=True)
class PropertyCheck:
    name: str
    applicable: bool
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ProfileReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(ch.passed for ch in self.checks if ch.applicable)

    def failures(self):
        return [ch for ch in self.checks if ch.applicable and not ch.passed]

    def __getitem__(self, name: str) -> PropertyCheck:
        for ch in self.checks:
            if ch.name == name:
                return ch
        raise KeyError(name)


def validate_profile(profile: RadialProfile, spec: ProfileFamilySpec) -> ProfileReport:
    """Grid-certified property report for a family member.

    Checks symmetry, the center height and curvature, monotonicity in s
    against a finite-difference neighbor, exactness of the closed-form bands,
    slope and curvature sign patterns, and the slope-root counts used by the
    orbit enumeration (two roots with opposite curvature on the matching
    side, negative profile values at positive-side outer-slope roots).
    """
    checks = []
    s, c = spec.s, spec.c
    F = center_value(s, c)
    a = abs(s)
    D = profile.domain()[1]
    grid = np.linspace(0.0, D, 1001)

    sym = float(np.max(np.abs(profile.value(-grid) - profile.value(grid))))
    checks.append(PropertyCheck("even_symmetry", True, sym <= 1e-12,
                                f"max asymmetry {sym:.3e}"))

    f0 = profile.value(0.0)
    checks.append(PropertyCheck("center_above_level", True, f0 > c,
                                f"f(0)={f0}, c={c}"))

    is_bump = spec.family is ProfileFamily.BUMP
    curv0 = profile.curvature(0.0)
    checks.append(PropertyCheck("center_curvature_negative", is_bump,
                                curv0 < 0 if is_bump else True,
                                f"f''(0)={curv0}"))

    jump = profile.curvature_jumps()
    scale = max(1.0, profile.curvature_scale())
    checks.append(PropertyCheck("second_derivative_continuity", True,
                                jump <= C2_JUMP_TOL * scale,
                                f"max f'' jump {jump:.3e} (scale {scale:.1e})"))

    # monotonicity in s against a neighbor 0.25 higher (or lower at the -1 edge)
    ds = 0.25
    s_hi = s + ds
    if s < 0 and s_hi > -1.0:
        s_hi, s_lo = s, s - ds
    else:
        s_lo = s
    try:
        lo_prof = build_profile(replace(spec, s=s_lo)) if s_lo != s else profile
        hi_prof = build_profile(replace(spec, s=s_hi)) if s_hi != s else profile
        full = np.linspace(-1.0, 1.0, 1001)
        gap = float(np.min(hi_prof.value(full) - lo_prof.value(full)))
        checks.append(PropertyCheck("monotone_in_s", True, gap >= -1e-12,
                                    f"min pointwise gap {gap:.3e}"))
    except InfeasibleSpecError as exc:
        checks.append(PropertyCheck("monotone_in_s", True, False, str(exc)))

    # closed-form bands
    def band_error(r0, r1, expected):
        pts = np.linspace(r0, r1, 201)
        return float(np.max(np.abs(profile.value(pts) - expected(pts))))

    tol_band = 1e-11 * max(1.0, abs(F), a)
    band_errs = []
    if is_bump:
        if s >= 1:
            band_errs.append(band_error(0.0, 1 - 1 / (4 * s), lambda r: F * (1 - r**2)))
            band_errs.append(band_error(1 - 1 / (8 * s), D, lambda r: 0.0 * r))
        else:
            band_errs.append(band_error(0.0, 1 / (8 * a), lambda r: F * (1 - r**2)))
            band_errs.append(band_error(1 / (4 * a), 1 - 1 / (4 * a), lambda r: s + 0.0 * r))
            band_errs.append(band_error(1 - 1 / (8 * a), D, lambda r: 0.0 * r))
    else:
        if s >= 1:
            band_errs.append(band_error(0.0, 1 - 3 / (8 * s), lambda r: F + 0.0 * r))
            band_errs.append(band_error(1 - 1 / (8 * s), D, lambda r: 0.0 * r))
        else:
            band_errs.append(band_error(0.0, 1 / (8 * a), lambda r: F + 0.0 * r))
            band_errs.append(band_error(3 / (8 * a), 1 - 3 / (8 * a), lambda r: s + 0.0 * r))
            band_errs.append(band_error(1 - 1 / (8 * a), D, lambda r: 0.0 * r))
    worst = max(band_errs)
    checks.append(PropertyCheck("band_layout", True, worst <= tol_band,
                                f"max band deviation {worst:.3e}"))

    # slope sign pattern
    fp = profile.slope(grid)
    if s >= 1:
        ok = bool(np.all(fp <= 1e-11))
        detail = f"max f' on r>=0: {float(np.max(fp)):.3e}"
    else:
        half = grid <= 0.5
        ok = bool(np.all(fp[half] <= 1e-11) and np.all(fp[~half] >= -1e-11))
        detail = "f' <= 0 below 1/2 and >= 0 above"
    checks.append(PropertyCheck("slope_sign_pattern", True, ok, detail))

    # strict curvature signs on the plateau family's transition halves
    if spec.family is ProfileFamily.PLATEAU:
        if s >= 1:
            b0, b2 = 1 - 3 / (8 * s), 1 - 1 / (8 * s)
        else:
            b0, b2 = 1 / (8 * a), 3 / (8 * a)
        b1 = 0.5 * (b0 + b2)
        eps = 1e-6 * (b2 - b0)
        neg = profile.curvature(np.linspace(b0 + eps, b1 - eps, 101))
        pos = profile.curvature(np.linspace(b1 + eps, b2 - eps, 101))
        ok = bool(np.all(neg < 0) and np.all(pos > 0))
        checks.append(PropertyCheck("curvature_sign_pattern", True, ok,
                                    f"bands ({b0:.4f},{b1:.4f},{b2:.4f})"))
    else:
        checks.append(PropertyCheck("curvature_sign_pattern", False, True,
                                    "bump family: no prescribed inflection bands"))

    # unique positive-value critical point (bump family)
    if is_bump:
        crit = solve_slope(profile, 0.0)
        bad = [root.r for root in crit
               if profile.value(root.r) > 1e-9 and abs(root.r) > 1e-9]
        checks.append(PropertyCheck("unique_positive_critical_point", True,
                                    not bad, f"extra positive critical radii {bad}"))
    else:
        checks.append(PropertyCheck("unique_positive_critical_point", False, True, ""))

    geom = spec.geometry
    has_geom = geom is not None and spec.ell != 0
    plateau = spec.family is ProfileFamily.PLATEAU

    def two_root_check(target, lo, hi):
        found = solve_slope(profile, target, lo=lo, hi=hi)
        if len(found) != 2:
            return False, f"expected 2 roots of f'={target} on [{lo},{hi}], got {len(found)}"
        r_lo, r_hi = found.roots
        ok = (r_lo.second_derivative_sign > 0 and r_hi.second_derivative_sign < 0
              and not r_lo.degenerate and not r_hi.degenerate)
        return ok, f"roots {r_lo.r:.6f} (f''>0), {r_hi.r:.6f} (f''<0)"

    # outer slope roots: two on the negative side when the top clears R|ell|
    applicable = plateau and has_geom and s >= 1 and F > geom.R * abs(spec.ell)
    if applicable:
        ok, detail = two_root_check(geom.R * abs(spec.ell), -D, 0.0)
        extra = solve_slope(profile, geom.R * abs(spec.ell), lo=0.0, hi=D)
        if len(extra):
            ok, detail = False, detail + f"; unexpected roots on r>0: {extra.radii}"
        checks.append(PropertyCheck("outer_slope_roots", True, ok, detail))
    else:
        checks.append(PropertyCheck("outer_slope_roots", False, True, ""))

    # marked-center slope roots: two on [-1/2, 0] for the deep-plateau family
    applicable = plateau and has_geom and s <= -1
    if applicable:
        ok, detail = two_root_check(geom.m_u * abs(spec.ell), -0.5, 0.0)
        checks.append(PropertyCheck("center_slope_roots", True, ok, detail))
    else:
        checks.append(PropertyCheck("center_slope_roots", False, True, ""))

    # positive-side roots of the far-chart slope have strictly negative value
    if applicable:
        target = (geom.R - abs(geom.u)) * abs(spec.ell)
        found = solve_slope(profile, target, lo=1e-9, hi=D)
        vals = profile.value(found.radii) if len(found) else np.array([])
        finite = all(root.interval is None for root in found)
        ok = finite and bool(np.all(vals < 0.0))
        checks.append(PropertyCheck("positive_roots_negative_value", True, ok,
                                    f"{len(found)} roots, values {vals}"))
    else:
        checks.append(PropertyCheck("positive_roots_negative_value", False, True, ""))

    return ProfileReport(checks=tuple(checks))
