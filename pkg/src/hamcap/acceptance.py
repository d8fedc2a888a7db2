"""Acceptance suite: the end-to-end checks the package must pass.

Each criterion returns a CriterionResult; ``run_all`` executes them in order.
The CLI ``accept`` command and the pytest acceptance module both call into
this file so there is exactly one implementation of the checks.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleSpecError
from .hamiltonians import reference_hamiltonian
from .homology_capacity import (betti, betti_vector, capacity_formula,
                                morse_critical_table,
                                relative_symplectic_homology_dim,
                                symplectic_homology_dim, transfer_rank,
                                verify_existence, verify_sharpness,
                                window_homology_dim)
from .numeric_orbits import (IntegratorConfig, default_rng, energy_drift,
                             integrate_flow_batch, lattice_seeds, sweep_orbits)
from .orbit_analysis import (FamilyKind, enumerate_families,
                             nondegenerate_orbit_count)
from .phase_space import PhaseSpaceConfig
from .profiles import (ProfileFamily, ProfileFamilySpec, build_profile,
                       validate_profile)

NEG_INF = float("-inf")


@dataclass
class CriterionResult:
    index: int
    name: str
    passed: bool
    runtime: float
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.index}: {self.name} " \
               f"({self.runtime:.1f}s) {self.detail}"


def _result(index, name, start, failures, extra=""):
    detail = extra if not failures else "; ".join(failures[:4])
    if failures and extra:
        detail = f"{extra}; {detail}"
    return CriterionResult(index=index, name=name, passed=not failures,
                           runtime=time.time() - start, detail=detail)


def criterion_capacity_formula(seed_budget: int = 1000) -> CriterionResult:
    """1: exact capacity values on the parameter grid plus sharpness sweeps."""
    start = time.time()
    failures = []
    rng = default_rng()
    cells = 0
    sharp_runs = 0
    for R in (0.5, 1.0, 2.0):
        for u in (-R / 2, 0.0, R / 2):
            geo = PhaseSpaceConfig(R=R, u=u, n=1)
            for ell in (-2, -1, 0, 1, 2):
                for a in (NEG_INF, 0.5, R * abs(ell) + 1.0):
                    cells += 1
                    expected = 0.0 if (ell == 0 and a <= 0) else \
                        max(R * abs(ell) + u * ell, a + u * ell)
                    got = capacity_formula(geo, ell, a).value
                    if got != expected:
                        failures.append(
                            f"formula({R},{u},{ell},{a}) = {got} != {expected}")
                        continue
                    if ell == 0 and a <= 0:
                        continue  # no admissible sharpness bump exists there
                    for delta in (0.2, 0.1):
                        sharp_runs += 1
                        rep = verify_sharpness(geo, ell, a, delta,
                                               seed_budget=seed_budget, rng=rng)
                        if not rep.passes:
                            failures.append(
                                f"sharpness({R},{u},{ell},{a},d={delta}) failed")
    return _result(1, "capacity formula and sharpness certificates", start,
                   failures, f"{cells} grid cells, {sharp_runs} sharpness runs")


def criterion_existence(tol: float = 1e-6) -> CriterionResult:
    """2: admissible deep-plateau Hamiltonians carry an orbit with action
    at least c - u*ell, with analytic and numeric data agreeing to 1e-6."""
    start = time.time()
    failures = []
    rng = default_rng()
    runs = 0
    for s, n, u, ell in itertools.product((-2.0, -4.0), (1, 2), (0.0, 0.3),
                                          (1, 2)):
        geo = PhaseSpaceConfig(R=1.0, u=u, n=n)
        level = max(geo.R * abs(ell) + u * ell, 0.0) + 0.1
        H = reference_hamiltonian(geo, ProfileFamily.PLATEAU, s=s, c=level,
                                  ell=ell)
        runs += 1
        rep = verify_existence(H, ell, tol=tol, rng=rng)
        tag = f"(s={s},n={n},u={u},ell={ell})"
        if not rep.passes:
            failures.append(f"existence {tag} did not verify")
            continue
        if rep.numeric_action < rep.required_action - tol:
            failures.append(f"existence {tag}: action below bound")
        if rep.level_agreement > tol or rep.action_agreement > tol:
            failures.append(f"existence {tag}: numeric mismatch "
                            f"{rep.level_agreement}, {rep.action_agreement}")
    return _result(2, "existence and action bound", start, failures,
                   f"{runs} Hamiltonians")


def criterion_orbit_count() -> CriterionResult:
    """3: the witness family's perturbation count equals 2^(n+1), matching
    the marked-torus Morse model and Betti total exactly."""
    start = time.time()
    failures = []
    for s, n, u, ell in itertools.product((-2.0, -4.0), (1, 2), (0.0, 0.3),
                                          (1, 2)):
        geo = PhaseSpaceConfig(R=1.0, u=u, n=n)
        level = max(geo.R * abs(ell) + u * ell, 0.0) + 0.1
        H = reference_hamiltonian(geo, ProfileFamily.PLATEAU, s=s, c=level,
                                  ell=ell)
        witnesses = [fam for fam in enumerate_families(H, ell)
                     if fam.kind is FamilyKind.CENTER and fam.morse_bott]
        tag = f"(s={s},n={n},u={u},ell={ell})"
        if not witnesses:
            failures.append(f"count {tag}: no nondegenerate center family")
            continue
        count = nondegenerate_orbit_count(max(witnesses,
                                              key=lambda f: f.action))
        table_points = len(morse_critical_table("marked", n).points)
        total = betti_vector(n + 1).total
        if not count == table_points == total == 2 ** (n + 1):
            failures.append(f"count {tag}: {count} vs {table_points} vs {total}")
    return _result(3, "orbit-count lower bound", start, failures)


def criterion_step_inequalities() -> CriterionResult:
    """4: outer-family actions straddle the threshold; deep-plateau outer-ramp
    actions are negative.  Exact sign checks."""
    start = time.time()
    failures = []
    for s, ell in itertools.product((2.0, 4.0), (1, 2)):
        geo = PhaseSpaceConfig(R=1.0, u=0.0, n=1)
        H = reference_hamiltonian(geo, ProfileFamily.PLATEAU, s=s, c=1.0,
                                  ell=ell)
        F = H.form.profile.value(0.0)
        a = 0.5 * (F + geo.R * abs(ell))  # F > a > R|ell|
        fams = enumerate_families(H, ell)
        if len(fams) != 2:
            failures.append(f"straddle(s={s},ell={ell}): {len(fams)} families")
            continue
        low, high = sorted(fam.action for fam in fams)
        if not (high > F > a and low < geo.R * abs(ell) <= a):
            failures.append(
                f"straddle(s={s},ell={ell}): {low}, {high} vs a={a}, F={F}")
    for s, u, ell in itertools.product((-2.0, -4.0), (0.0, 0.3, -0.3), (1, 2)):
        geo = PhaseSpaceConfig(R=1.0, u=u, n=1)
        level = max(u * ell, 0.0) + 0.5
        H = reference_hamiltonian(geo, ProfileFamily.PLATEAU, s=s, c=level,
                                  ell=ell)
        ramp = [fam for fam in enumerate_families(H, ell)
                if fam.kind is FamilyKind.OUTER]
        if any(fam.action >= 0 for fam in ramp):
            failures.append(f"ramp(s={s},u={u},ell={ell}): nonnegative action")
    return _result(4, "step-inequality suite", start, failures)


def criterion_dimension_tables() -> CriterionResult:
    """5: homology tables match their case splits, anchors, and Kunneth sums."""
    start = time.time()
    failures = []
    for n in (1, 2, 3):
        geo = PhaseSpaceConfig(R=1.0, u=0.25, n=n)
        full = morse_critical_table("full", n)
        marked = morse_critical_table("marked", n)
        if full.min_value != -n * (n + 2) or full.distinguished_value != 0.0:
            failures.append(f"morse anchors broken at n={n}")
        if full.index_counts != betti_vector(2 * n + 1).dims:
            failures.append(f"full Morse model not perfect at n={n}")
        if marked.index_counts != betti_vector(n + 1).dims:
            failures.append(f"marked Morse model not perfect at n={n}")
        if any(pt.value >= 0 for pt in marked.points):
            failures.append(f"marked Morse values not negative at n={n}")
        for k in range(0, 2 * n + 2):
            w = window_homology_dim(n, k)  # includes its own Kunneth assert
            if symplectic_homology_dim(geo, 1, 0.5 * geo.R, k) != 0:
                failures.append(f"sh below threshold nonzero (n={n},k={k})")
            hi = symplectic_homology_dim(geo, 1, 2.0 * geo.R, k)
            if hi != betti(2 * n + 1, k):
                failures.append(f"sh above threshold wrong (n={n},k={k})")
            if k <= n + 1 and betti(2 * n + 1, k) != w + betti(n + 1, k):
                failures.append(f"window consistency broken (n={n},k={k})")
            a, c = 1.5, 2.0  # R|ell| = 1 < a <= c - u*ell = 1.75
            r = relative_symplectic_homology_dim(geo, 1, a, c, k)
            t = transfer_rank(geo, 1, a, c, k)
            if r != (betti(n + 1, k)):
                failures.append(f"rsh wrong (n={n},k={k})")
            if t != (betti(n + 1, k) if k <= n + 1 else 0):
                failures.append(f"transfer rank wrong (n={n},k={k})")
            if t > min(hi, r) and (hi or r):
                failures.append(f"rank bound violated (n={n},k={k})")
            if relative_symplectic_homology_dim(geo, 1, c - geo.u + 0.5, c, k) != 0:
                failures.append(f"rsh above window nonzero (n={n},k={k})")
    return _result(5, "dimension tables", start, failures)


_MATRIX = [
    (family, s, n)
    for family in (ProfileFamily.BUMP, ProfileFamily.PLATEAU)
    for s in (2.0, 4.0, -2.0, -4.0)
    for n in (1, 2)
]


def criterion_oracle_equivalence(seed_budget: int = 1000) -> CriterionResult:
    """6: shooting sweeps rediscover the analytic families exactly (level and
    action within 1e-6, nothing extra), flows conserve energy to 1e-8, and
    the time-one map passes the symplecticity determinant proxy at 1e-5."""
    start = time.time()
    failures = []
    rng = default_rng()
    config = IntegratorConfig()
    for family, s, n in _MATRIX:
        geo = PhaseSpaceConfig(R=1.0, u=0.0, n=n)
        H = reference_hamiltonian(geo, family, s=s, c=1.0)
        tag = f"({family.value},s={s},n={n}"
        for ell in (-2, -1, 0, 1, 2):
            sweep = sweep_orbits(H, ell, seed_budget=seed_budget, rng=rng)
            fams = enumerate_families(H, ell)
            if ell == 0:
                want = sorted(set(round(f.action, 6) for f in fams))
                got = sorted(set(round(c.action, 6) for c in sweep.clusters))
                if want != got:
                    failures.append(f"{tag},ell=0): actions {got} != {want}")
                continue
            want_pairs = sorted((round(f.level, 6), round(f.action, 6))
                                for f in fams)
            got_pairs = sorted((round(c.level, 6), round(c.action, 6))
                               for c in sweep.clusters)
            if len(want_pairs) != len(got_pairs):
                failures.append(f"{tag},ell={ell}): count {len(got_pairs)} "
                                f"!= {len(want_pairs)}")
                continue
            for (wl, wa), (gl, ga) in zip(want_pairs, got_pairs):
                if abs(wl - gl) > 1e-6 or abs(wa - ga) > 1e-6:
                    failures.append(f"{tag},ell={ell}): ({gl},{ga}) vs ({wl},{wa})")
        starts = lattice_seeds(geo, 1000, rng=rng)
        drift = energy_drift(H, starts, config)
        if drift > 1e-8:
            failures.append(f"{tag}): energy drift {drift:.2e}")
        dets = _determinant_samples(H, rng, config, points=20)
        if np.max(np.abs(dets - 1.0)) > 1e-5:
            failures.append(f"{tag}): det deviation {np.max(np.abs(dets-1)):.2e}")
    return _result(6, "numeric-analytic oracle equivalence", start, failures,
                   f"{len(_MATRIX)} Hamiltonians x 5 classes")


def _determinant_samples(H, rng, config, points=20, eps=1e-6):
    """Batched finite-difference time-one-map determinants at random starts."""
    geo = H.geometry
    d = geo.dim
    base = lattice_seeds(geo, points, rng=rng)[:points]
    batch = []
    for z in base:
        for col in range(d):
            dz = np.zeros(d)
            dz[col] = eps
            batch.append(z + dz)
            batch.append(z - dz)
    ends = integrate_flow_batch(H, np.array(batch), config)
    dets = []
    for i in range(len(base)):
        block = ends[i * 2 * d:(i + 1) * 2 * d]
        J = np.empty((d, d))
        for col in range(d):
            J[:, col] = (block[2 * col] - block[2 * col + 1]) / (2 * eps)
        dets.append(np.linalg.det(J))
    return np.array(dets)


def criterion_profile_properties() -> CriterionResult:
    """7: every built family member passes its applicable property checks."""
    start = time.time()
    failures = []
    geo = PhaseSpaceConfig(R=1.0, u=0.25, n=1)
    for family in (ProfileFamily.BUMP, ProfileFamily.PLATEAU):
        for s in (1.0, 2.0, 4.0, -1.0, -2.0, -4.0):
            for ell in (1, 2):
                spec = ProfileFamilySpec(family=family, s=s, c=1.0,
                                         geometry=geo, ell=ell)
                try:
                    profile = build_profile(spec)
                except InfeasibleSpecError as exc:
                    failures.append(f"build({family.value},s={s}): {exc}")
                    continue
                report = validate_profile(profile, spec)
                for check in report.failures():
                    failures.append(
                        f"({family.value},s={s},ell={ell}) {check.name}: "
                        f"{check.detail}")
    return _result(7, "profile property suite", start, failures)


def run_all() -> list:
    return [
        criterion_capacity_formula(),
        criterion_existence(),
        criterion_orbit_count(),
        criterion_step_inequalities(),
        criterion_dimension_tables(),
        criterion_oracle_equivalence(),
        criterion_profile_properties(),
    ]
