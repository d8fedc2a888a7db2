"""Analytic enumeration of periodic-orbit families for radial Hamiltonians.

For a winding number ell != 0 every one-periodic trajectory of a radial
Hamiltonian is a straight angular drift at a fixed momentum level, so the
families are indexed by solutions of a slope equation on the radial profile:

* outer-radial form: f'(r) = scale * ell, level p0 = scale * r, the family
  fills the whole torus directions (dimension 2n + 1);
* three-chart bump: f'(r) = m_u * ell with |r| <= 1/2 (the bump chart),
  level p0 = u + m_u * r with all torus momenta pinned to zero
  (dimension n + 1);
* three-chart outer ramps: f'(r) = (R - |u|) * ell with |r| >= 1/2, level
  p0 = sign(r) |u| + (R - |u|) r (dimension 2n + 1); these only occur on the
  ramp matching the sign of ell and their actions are negative for the
  deep-plateau family.

In all cases the action with the zero-level reference loop is
H(family) - level * ell.  A family is counted nondegenerate as a family
exactly when f'' at its radial root is nonzero; a Morse perturbation then
splits it into at least 2^dimension isolated orbits (the total Betti number
of the torus it fills).

For ell = 0 the critical components of the profile with nonzero value are
reported (isolated critical radii and flat plateaus); constant loops on the
zero set exist for every compactly supported Hamiltonian with action zero
and are deliberately left out of the enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import NotMorseBottError, NotRadialError
from .hamiltonians import (OuterRadialForm, ProductHamiltonian, SampledGridForm,
                           ThreeChartForm)
from .phase_space import HomotopyClass, LoopSample, as_class, lift_loop
from .profiles import DEGENERATE_CURVATURE_TOL, solve_slope

#: Profile values below this count as "on the zero set" for ell = 0 families.
ZERO_VALUE_TOL = 1e-9


class FamilyKind(str, Enum):
    RADIAL = "radial"        # level set of a p0-only Hamiltonian, full torus
    CENTER = "center"        # marked-center bump family, torus momenta pinned
    OUTER = "outer"          # outer-ramp family of the three-chart form
    CONSTANT = "constant"    # fixed-point family (contractible loops)


@dataclass(frozen=True)
class PeriodicOrbitFamily:
    """One connected manifold of one-periodic trajectories."""

    kind: FamilyKind
    radial_root: float
    level: float
    dimension: int
    action: float
    ell: int
    morse_bott: bool
    second_derivative_sign: int
    level_range: Optional[tuple] = None  # set for flat fixed-point regions

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind.value,
            "radialRoot": self.radial_root,
            "level": self.level,
            "dimension": self.dimension,
            "action": self.action,
            "ell": self.ell,
            "morseBott": self.morse_bott,
            "secondDerivativeSign": self.second_derivative_sign,
        }
        if self.level_range is not None:
            out["levelRange"] = list(self.level_range)
        return out


@dataclass(frozen=True)
class ActionSpectrum:
    """Sorted action values with their family indices."""

    entries: tuple  # of (action, family_index)
    families: tuple

    @property
    def actions(self) -> np.ndarray:
        return np.array([a for a, _ in self.entries])

    def __len__(self):
        return len(self.entries)


def family_action(profile_value: float, level: float, ell: int) -> float:
    """Action of a fixed-level family: H value minus level times winding."""
    return profile_value - level * ell


def enumerate_families(H: ProductHamiltonian, homotopy_class) -> list:
    """All periodic-orbit families of a radial Hamiltonian in one class.

    Raises NotRadialError for sampled-grid forms; results are sorted by
    level for determinism.
    """
    geo = H.geometry
    cls = as_class(homotopy_class, geo.n)
    ell = cls.ell
    form = H.form
    if isinstance(form, OuterRadialForm):
        families = _outer_radial_families(geo, form, ell)
    elif isinstance(form, ThreeChartForm):
        families = _three_chart_families(geo, form, ell)
    else:
        raise NotRadialError("analytic enumeration needs a radial form")
    families.sort(key=lambda fam: (fam.level, fam.kind.value))
    return families


def _root_family(kind, root, level, dimension, action, ell):
    return PeriodicOrbitFamily(
        kind=kind,
        radial_root=float(root.r),
        level=float(level),
        dimension=dimension,
        action=float(action),
        ell=ell,
        morse_bott=not root.degenerate,
        second_derivative_sign=root.second_derivative_sign,
    )


def _outer_radial_families(geo, form, ell):
    profile, scale = form.profile, form.scale
    dim = 2 * geo.n + 1
    if ell == 0:
        return _constant_families(geo, profile,
                                  level_of=lambda r: scale * r,
                                  dimension=dim)
    out = []
    for root in solve_slope(profile, scale * ell):
        level = scale * root.r
        if not geo.contains_level(level):
            continue
        value = profile.value(root.r)
        out.append(_root_family(FamilyKind.RADIAL, root, level, dim,
                                family_action(value, level, ell), ell))
    return out


def _three_chart_families(geo, form, ell):
    profile = form.profile
    n = geo.n
    au = abs(geo.u)
    if ell == 0:
        mid = form.middle_level
        families = [
            fam for fam in _constant_families(
                geo, profile,
                level_of=lambda r: geo.u + geo.m_u * r,
                dimension=n + 1,
                lo=-0.5, hi=0.5,
            )
            # chart plateaus at the middle level belong to the single
            # connected middle region reported below
            if abs(fam.action - mid) > ZERO_VALUE_TOL
        ]
        if abs(mid) > ZERO_VALUE_TOL:
            lo_level = -(au + (geo.R - au) * profile.support_radius)
            hi_level = au + (geo.R - au) * profile.support_radius
            families.append(PeriodicOrbitFamily(
                kind=FamilyKind.CONSTANT, radial_root=0.5,
                level=0.5 * (lo_level + hi_level), dimension=2 * n + 2,
                action=float(mid), ell=0, morse_bott=False,
                second_derivative_sign=0, level_range=(lo_level, hi_level)))
        return families

    out = []
    # marked-center bump: slope m_u * ell inside the chart radius 1/2
    for root in solve_slope(profile, geo.m_u * ell, lo=-0.5, hi=0.5):
        level = geo.u + geo.m_u * root.r
        value = profile.value(root.r)
        out.append(_root_family(FamilyKind.CENTER, root, level, n + 1,
                                family_action(value, level, ell), ell))
    # outer ramps: slope (R - |u|) * ell beyond chart coordinate 1/2; the
    # ramp with p0 <= -(R+|u|)/2 can only carry negative drift, so each sign
    # of ell uses exactly one side
    if ell > 0:
        ramp_roots = solve_slope(profile, (geo.R - au) * ell, lo=0.5)
    else:
        ramp_roots = solve_slope(profile, (geo.R - au) * ell, hi=-0.5)
    for root in ramp_roots:
        level = np.sign(root.r) * au + (geo.R - au) * root.r
        if not geo.contains_level(level):
            continue
        value = profile.value(root.r)
        out.append(_root_family(FamilyKind.OUTER, root, level, 2 * n + 1,
                                family_action(value, level, ell), ell))
    return out


def _constant_families(geo, profile, level_of, dimension, lo=None, hi=None):
    """Fixed-point families for ell = 0: critical radii with nonzero value.

    Flat plateaus become one family each (reported at the plateau midpoint
    with the level interval attached); the ambient zero set is skipped.
    """
    families = []
    for root in solve_slope(profile, 0.0, lo=lo, hi=hi):
        value = profile.value(root.r)
        if abs(value) <= ZERO_VALUE_TOL:
            continue
        level_range = None
        if root.interval is not None:
            level_range = tuple(sorted((float(level_of(root.interval[0])),
                                        float(level_of(root.interval[1])))))
        level = level_of(root.r)
        families.append(PeriodicOrbitFamily(
            kind=FamilyKind.CONSTANT, radial_root=float(root.r),
            level=float(level), dimension=dimension, action=float(value),
            ell=0, morse_bott=not root.degenerate,
            second_derivative_sign=root.second_derivative_sign,
            level_range=level_range))
    # an even profile's mirror-half plateaus coincide with the originals;
    # merge families whose level ranges overlap
    merged = []
    for fam in sorted(families, key=lambda f: f.level):
        if merged and fam.level_range and merged[-1].level_range and \
                fam.level_range[0] <= merged[-1].level_range[1] + 1e-12 and \
                abs(fam.action - merged[-1].action) < 1e-12:
            prev = merged.pop()
            lo_l = min(prev.level_range[0], fam.level_range[0])
            hi_l = max(prev.level_range[1], fam.level_range[1])
            merged.append(PeriodicOrbitFamily(
                kind=FamilyKind.CONSTANT, radial_root=prev.radial_root,
                level=0.5 * (lo_l + hi_l), dimension=prev.dimension,
                action=prev.action, ell=0, morse_bott=False,
                second_derivative_sign=0, level_range=(lo_l, hi_l)))
        else:
            merged.append(fam)
    return merged


def action_spectrum(H: ProductHamiltonian, homotopy_class) -> ActionSpectrum:
    families = enumerate_families(H, homotopy_class)
    entries = sorted((fam.action, idx) for idx, fam in enumerate(families))
    return ActionSpectrum(entries=tuple(entries), families=tuple(families))


def max_action_orbit(H: ProductHamiltonian, homotopy_class):
    """Family with the largest action, or None when the class is empty."""
    spectrum = action_spectrum(H, homotopy_class)
    if not spectrum.entries:
        return None
    action, idx = spectrum.entries[-1]
    return spectrum.families[idx], action


def nondegenerate_orbit_count(family: PeriodicOrbitFamily) -> int:
    """Minimal orbit count after a Morse perturbation of the family.

    Equals the total Betti number of the family's torus, 2 ** dimension.
    """
    if not family.morse_bott:
        raise NotMorseBottError(
            f"family at level {family.level} is degenerate (f'' below "
            f"{DEGENERATE_CURVATURE_TOL})"
        )
    return 2 ** family.dimension


def sample_representative(H: ProductHamiltonian, family: PeriodicOrbitFamily,
                          samples: int = 128) -> LoopSample:
    """Materialize one loop of the family as a lifted sample.

    The representative sits at torus coordinates zero (forced for
    marked-center families, free otherwise) and drifts uniformly in q0.
    """
    geo = H.geometry
    ts = np.arange(samples) / samples
    states = np.zeros((samples, geo.dim))
    states[:, 0] = family.level
    states[:, 1] = np.mod(family.ell * ts, 1.0)
    return lift_loop(states, as_class(family.ell, geo.n))
