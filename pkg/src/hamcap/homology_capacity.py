"""Closed-form homology tables, the capacity formula, and end-to-end verifiers.

Dimension tables
----------------
Filtered loop-space homology of the annulus-torus product is governed by two
perfect Morse models: cosine sums on the full torus T^(2n+1) (all angle
coordinates plus the torus momenta as half-period cosines) and on the marked
torus T^(n+1).  The closed-form dimension tables implemented here are

* ``symplectic_homology_dim``: 0 below the threshold a < R|ell|, the Betti
  numbers of T^(2n+1) at or above it (for the trivial class, any a > 0);
* ``relative_symplectic_homology_dim``: the Betti numbers of T^(n+1) for
  0 < a <= c - u*ell and 0 above c - u*ell, requiring c > max(u*ell, 0);
* ``transfer_rank``: the comparison map between the two has rank
  b_k(T^(n+1)) exactly when R|ell| < a <= c - u*ell and 0 <= k <= n+1;
* ``window_homology_dim``: the mid-window dimensions
  b_k(T^(2n+1)) - b_k(T^(n+1)) for 1 <= k <= n+1, b_k(T^(2n+1)) for
  k >= n+2, and 0 at k = 0, cross-checked against the reduced Kunneth sum
  over T^n x T^(n+1).

Capacity
--------
The relative capacity of the marked torus in the annulus-torus product is

    C(R, u, ell, a) = max(R|ell| + u*ell, a + u*ell),

with the convention that the value is 0 when ell = 0 and a <= 0 (constant
loops of action zero always exist).  ``verify_sharpness`` certifies the lower
bound: the sharpness Hamiltonian at marked level m - delta admits no class-ell
orbit of action >= a.  ``verify_existence`` certifies the upper bound: an
admissible Hamiltonian carries an orbit of action >= c - u*ell, with the
orbit-count lower bound 2^(n+1) for nondegenerate witness families.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (InadmissibleHamiltonianError, InvalidHypothesisError,
                     InvalidIntervalError, VerificationFailureError)
from .hamiltonians import ProductHamiltonian, outer_radial
from .numeric_orbits import (DEFAULT_CONFIG, IntegratorConfig, default_rng,
                             shoot_periodic_orbit, sweep_orbits)
from .orbit_analysis import (FamilyKind, enumerate_families, max_action_orbit,
                             nondegenerate_orbit_count, sample_representative)
from .phase_space import PhaseSpaceConfig
from .profiles import build_sharpness_profile

NEG_INF = float("-inf")


def betti(m: int, k: int) -> int:
    """k-th Betti number of the m-torus (binomial coefficient)."""
    if k < 0 or k > m:
        return 0
    return math.comb(m, k)


@dataclass(frozen=True)
class BettiVector:
    """All Betti numbers of a torus, with their total 2^m."""

    m: int
    dims: tuple

    @property
    def total(self) -> int:
        return sum(self.dims)


def betti_vector(m: int) -> BettiVector:
    if m < 1:
        raise ValueError("torus dimension must be at least 1")
    return BettiVector(m=m, dims=tuple(math.comb(m, k) for k in range(m + 1)))


# -- Morse models -------------------------------------------------------------


@dataclass(frozen=True)
class MorseCriticalPoint:
    coordinates: tuple
    index: int
    value: float
    distinguished: bool = False


@dataclass(frozen=True)
class MorseCritTable:
    """Critical data of a perfect cosine Morse function on a torus."""

    kind: str
    n: int
    torus_dim: int
    points: tuple

    @property
    def index_counts(self) -> tuple:
        counts = [0] * (self.torus_dim + 1)
        for pt in self.points:
            counts[pt.index] += 1
        return tuple(counts)

    @property
    def min_value(self) -> float:
        return min(pt.value for pt in self.points)

    @property
    def distinguished_value(self) -> Optional[float]:
        for pt in self.points:
            if pt.distinguished:
                return pt.value
        return None


def morse_critical_table(kind: str, n: int) -> MorseCritTable:
    """Critical points of the torus Morse models.

    ``marked``: on T^(n+1) with angle coordinates (q0..qn),

        F(q) = -n(n+2) + (1/2) (n + 1 + sum_i cos(2 pi q_i)),

    2^(n+1) critical points, all of negative value.

    ``full``: on T^(2n+1) with torus momenta (p1..pn, period 2) and angles,

        F(p, q) = -n(n+2) + ((n+2)/2) (n + sum_i cos(pi p_i))
                          + (1/2) (n + 1 + sum_i cos(2 pi q_i)),

    2^(2n+1) critical points with minimum exactly -n(n+2); the saddle that
    maximizes the momentum part and minimizes the angle part has value 0 and
    is marked distinguished.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    base = -n * (n + 2)
    points = []
    if kind == "marked":
        for signs in itertools.product((1.0, -1.0), repeat=n + 1):
            qs = tuple(0.0 if s > 0 else 0.5 for s in signs)
            value = base + 0.5 * (n + 1 + sum(signs))
            index = sum(1 for s in signs if s > 0)
            points.append(MorseCriticalPoint(coordinates=qs, index=index,
                                             value=value))
        return MorseCritTable(kind=kind, n=n, torus_dim=n + 1,
                              points=tuple(points))
    if kind == "full":
        for p_signs in itertools.product((1.0, -1.0), repeat=n):
            ps = tuple(0.0 if s > 0 else 1.0 for s in p_signs)
            for q_signs in itertools.product((1.0, -1.0), repeat=n + 1):
                qs = tuple(0.0 if s > 0 else 0.5 for s in q_signs)
                value = (base + 0.5 * (n + 2) * (n + sum(p_signs))
                         + 0.5 * (n + 1 + sum(q_signs)))
                index = sum(1 for s in p_signs if s > 0) + \
                    sum(1 for s in q_signs if s > 0)
                distinguished = all(s > 0 for s in p_signs) and \
                    all(s < 0 for s in q_signs)
                points.append(MorseCriticalPoint(
                    coordinates=ps + qs, index=index, value=value,
                    distinguished=distinguished))
        table = MorseCritTable(kind=kind, n=n, torus_dim=2 * n + 1,
                               points=tuple(points))
        assert table.min_value == base
        assert table.distinguished_value == 0.0
        return table
    raise ValueError("kind must be 'full' or 'marked'")


# -- dimension tables ---------------------------------------------------------


def symplectic_homology_dim(geometry: PhaseSpaceConfig, ell: int, a: float,
                            k: int) -> int:
    """Degree-k dimension of the action-filtered loop homology above a."""
    n = geometry.n
    if ell == 0:
        if not a > 0:
            raise InvalidIntervalError(
                "the trivial class needs an action window avoiding 0 (a > 0)"
            )
        return betti(2 * n + 1, k)
    if a < geometry.R * abs(ell):
        return 0
    return betti(2 * n + 1, k)


def relative_symplectic_homology_dim(geometry: PhaseSpaceConfig, ell: int,
                                     a: float, c: float, k: int) -> int:
    """Degree-k dimension of the marked-set-relative homology at level c."""
    n = geometry.n
    floor = max(geometry.u * ell, 0.0)
    if not c > floor:
        raise InvalidHypothesisError(
            f"level must satisfy c > max(u*ell, 0) = {floor}, got c={c}"
        )
    if not a > 0:
        raise InvalidIntervalError("the relative table is defined for a > 0")
    if a <= c - geometry.u * ell:
        return betti(n + 1, k)
    return 0


def transfer_rank(geometry: PhaseSpaceConfig, ell: int, a: float, c: float,
                  k: int) -> int:
    """Rank of the comparison map from the global to the relative table.

    Nonzero exactly when R|ell| < a <= c - u*ell and 0 <= k <= n+1, where it
    equals b_k(T^(n+1)).
    """
    n = geometry.n
    floor = max(geometry.u * ell, 0.0)
    if not c > floor:
        raise InvalidHypothesisError(
            f"level must satisfy c > max(u*ell, 0) = {floor}, got c={c}"
        )
    if not a > 0:
        raise InvalidIntervalError("the transfer rank is defined for a > 0")
    if geometry.R * abs(ell) < a <= c - geometry.u * ell and 0 <= k <= n + 1:
        return betti(n + 1, k)
    return 0


def window_homology_dim(n: int, k: int) -> int:
    """Mid-window homology dimension between the two thresholds.

    Closed form: 0 at k = 0, b_k(T^(2n+1)) - b_k(T^(n+1)) for 1 <= k <= n+1,
    and the full b_k(T^(2n+1)) for k = n+2, ..., 2n+1.  Cross-checked against
    the reduced Kunneth sum over T^n x T^(n+1).
    """
    if k < 0 or k > 2 * n + 1:
        return 0
    if k == 0:
        value = 0
    elif k <= n + 1:
        value = betti(2 * n + 1, k) - betti(n + 1, k)
    else:
        value = betti(2 * n + 1, k)
    kunneth = sum(betti(n, i) * betti(n + 1, k - i) for i in range(1, n + 1))
    if value != kunneth:
        raise AssertionError(
            f"window dimension mismatch at (n={n}, k={k}): {value} vs {kunneth}"
        )
    return value


# -- capacity ------------------------------------------------------------------


@dataclass(frozen=True)
class CapacityResult:
    """Capacity value with optional witness references."""

    value: float
    geometry: PhaseSpaceConfig
    ell: int
    a: float
    witness_sharpness: Optional[dict] = None
    witness_existence: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "R": self.geometry.R, "u": self.geometry.u, "n": self.geometry.n,
            "ell": self.ell, "a": _encode_extended(self.a),
            "value": _encode_extended(self.value),
            "witnessSharpness": self.witness_sharpness,
            "witnessExistence": self.witness_existence,
        }


def _encode_extended(x):
    """Floats with explicit string sentinels for the infinities."""
    if x == float("inf"):
        return "inf"
    if x == NEG_INF:
        return "-inf"
    return x


def capacity_formula(geometry: PhaseSpaceConfig, ell: int,
                     a: float = NEG_INF) -> CapacityResult:
    """The relative capacity max(R|ell| + u*ell, a + u*ell).

    For ell = 0 with a <= 0 the value is 0: every compactly supported
    Hamiltonian has constant trajectories of action zero.
    """
    R, u = geometry.R, geometry.u
    if ell == 0 and a <= 0:
        value = 0.0
    else:
        value = max(R * abs(ell) + u * ell, a + u * ell)
    return CapacityResult(value=float(value), geometry=geometry, ell=int(ell),
                          a=a)


# -- verifiers -----------------------------------------------------------------


@dataclass(frozen=True)
class SharpnessReport:
    """Certificate that level m - delta admits no class-ell orbit of action >= a."""

    geometry: PhaseSpaceConfig
    ell: int
    a: float
    delta: float
    m: float
    marked_infimum: float
    orbit_free: bool
    analytic_family_count: int
    analytic_max_action: Optional[float]
    numeric_converged: int
    numeric_max_action: Optional[float]
    seed_count: int
    passes: bool

    def to_dict(self) -> dict:
        return {
            "query": {"R": self.geometry.R, "u": self.geometry.u,
                      "n": self.geometry.n, "ell": self.ell,
                      "a": _encode_extended(self.a), "delta": self.delta},
            "m": self.m,
            "markedInfimum": self.marked_infimum,
            "orbitFree": self.orbit_free,
            "analyticFamilyCount": self.analytic_family_count,
            "analyticMaxAction": self.analytic_max_action,
            "numericConverged": self.numeric_converged,
            "numericMaxAction": self.numeric_max_action,
            "seedCount": self.seed_count,
            "pass": self.passes,
        }


def verify_sharpness(geometry: PhaseSpaceConfig, ell: int, a: float,
                     delta: float, seed_budget: int = 1000,
                     config: IntegratorConfig = DEFAULT_CONFIG,
                     rng=None) -> SharpnessReport:
    """Build the sharpness Hamiltonian and certify the capacity lower bound.

    The profile peaks at m - delta over the marked set.  When a <= R|ell| the
    slope bounds rule out class-ell orbits entirely (empty analytic root set,
    zero converged shooting seeds); otherwise every orbit's action stays
    strictly below a, analytically and over the sweep.
    """
    rng = rng if rng is not None else default_rng()
    profile = build_sharpness_profile(geometry, ell, a, delta)
    m = profile.meta["m"]
    H = outer_radial(geometry, profile, scale=1.0)
    marked = H.marked_infimum()

    families = enumerate_families(H, ell)
    analytic_max = max((fam.action for fam in families), default=None)
    sweep = sweep_orbits(H, ell, seed_budget=seed_budget, config=config,
                         rng=rng)
    numeric_max = max((cl.action for cl in sweep.clusters), default=None)

    expect_orbit_free = ell != 0 and a <= geometry.R * abs(ell)
    ok_marked = abs(marked - (m - delta)) < 1e-9 * max(1.0, m)
    if expect_orbit_free:
        orbit_free = not families and sweep.converged_count == 0
        ok_actions = orbit_free
    else:
        orbit_free = False
        ok_analytic = analytic_max is None or analytic_max < a
        ok_numeric = numeric_max is None or numeric_max < a
        ok_actions = ok_analytic and ok_numeric
    return SharpnessReport(
        geometry=geometry, ell=ell, a=a, delta=delta, m=m,
        marked_infimum=marked, orbit_free=orbit_free,
        analytic_family_count=len(families), analytic_max_action=analytic_max,
        numeric_converged=sweep.converged_count, numeric_max_action=numeric_max,
        seed_count=sweep.seed_count, passes=bool(ok_marked and ok_actions))


@dataclass(frozen=True)
class ExistenceReport:
    """Certificate that an admissible Hamiltonian carries a high-action orbit."""

    geometry: PhaseSpaceConfig
    ell: int
    c: float
    required_action: float
    witness: Optional[dict]
    analytic_action: Optional[float]
    numeric_level: Optional[float]
    numeric_action: Optional[float]
    level_agreement: Optional[float]
    action_agreement: Optional[float]
    count_lower_bound: Optional[int]
    inconclusive: bool
    passes: bool

    def to_dict(self) -> dict:
        return {
            "query": {"R": self.geometry.R, "u": self.geometry.u,
                      "n": self.geometry.n, "ell": self.ell, "c": self.c},
            "requiredAction": self.required_action,
            "witness": self.witness,
            "analyticAction": self.analytic_action,
            "numericLevel": self.numeric_level,
            "numericAction": self.numeric_action,
            "levelAgreement": self.level_agreement,
            "actionAgreement": self.action_agreement,
            "countLowerBound": self.count_lower_bound,
            "inconclusive": self.inconclusive,
            "pass": self.passes,
        }


def verify_existence(H: ProductHamiltonian, ell: int, tol: float = 1e-6,
                     seed_budget: int = 10000,
                     config: IntegratorConfig = DEFAULT_CONFIG,
                     rng=None) -> ExistenceReport:
    """Find an orbit of action >= c - u*ell under an admissible Hamiltonian.

    c is the marked-set infimum and must reach max(R|ell| + u*ell, 0).
    Radial forms use the complete analytic enumeration with a numeric
    cross-check of the witness; other forms fall back to a bounded shooting
    sweep and report inconclusive when the budget is exhausted.
    """
    geo = H.geometry
    rng = rng if rng is not None else default_rng()
    c = H.marked_infimum()
    threshold = max(geo.R * abs(ell) + geo.u * ell, 0.0)
    if c < threshold:
        raise InadmissibleHamiltonianError(
            f"marked infimum {c} is below max(R|ell|+u*ell, 0) = {threshold}"
        )
    required = c - geo.u * ell

    try:
        families = enumerate_families(H, ell)
        radial = True
    except Exception:
        families = []
        radial = False

    if radial:
        candidates = [fam for fam in families if fam.action >= required - tol]
        if not candidates:
            raise VerificationFailureError(
                f"no class-{ell} family reaches action {required}"
            )
        witness = max(candidates, key=lambda fam: fam.action)
        seed = sample_representative(H, witness).states[0].copy()
        seed[0] += 1e-3 * geo.R  # start off the family to exercise the solver
        result = shoot_periodic_orbit(H, ell, seed, config)
        level_gap = abs(result.level - witness.level) if result.converged else None
        action_gap = abs(result.action - witness.action) if result.converged else None
        count = nondegenerate_orbit_count(witness) if witness.morse_bott else None
        passes = bool(result.converged and level_gap is not None
                      and level_gap <= tol and action_gap <= tol)
        return ExistenceReport(
            geometry=geo, ell=ell, c=c, required_action=required,
            witness=witness.to_dict(), analytic_action=witness.action,
            numeric_level=result.level if result.converged else None,
            numeric_action=result.action if result.converged else None,
            level_agreement=level_gap, action_agreement=action_gap,
            count_lower_bound=count, inconclusive=False, passes=passes)

    sweep = sweep_orbits(H, ell, seed_budget=seed_budget, config=config,
                         rng=rng)
    winners = [cl for cl in sweep.clusters if cl.action >= required - tol]
    if winners:
        best = max(winners, key=lambda cl: cl.action)
        return ExistenceReport(
            geometry=geo, ell=ell, c=c, required_action=required,
            witness=best.to_dict(), analytic_action=None,
            numeric_level=best.level, numeric_action=best.action,
            level_agreement=None, action_agreement=None,
            count_lower_bound=None, inconclusive=False, passes=True)
    return ExistenceReport(
        geometry=geo, ell=ell, c=c, required_action=required, witness=None,
        analytic_action=None, numeric_level=None, numeric_action=None,
        level_agreement=None, action_agreement=None, count_lower_bound=None,
        inconclusive=True, passes=False)
