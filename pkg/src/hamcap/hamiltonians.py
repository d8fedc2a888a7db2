"""Product Hamiltonians on the annulus-torus phase space.

Three autonomous forms are supported:

* outer-radial: H(p, q) = f(p0 / scale) for a radial profile f, the shape
  used by the flat-top families (scale = R) and the sharpness bump
  (scale = 1, raw annulus coordinate);
* three-chart: a bump f(|p - center| / m_u) around the marked momentum
  center, outer ramps f((p0 -+ |u|) / (R - |u|)) on the two annulus ends,
  and the constant plateau level in between, dispatched by the region
  predicates in that order;
* sampled-grid: multilinear interpolation of tabulated values over the
  momentum box (p0, p1, ..., pn), optionally augmented with cosine modes in
  the angle variables, each carried by its own momentum envelope grid.

All forms evaluate H, the momentum gradient, and the Hamiltonian vector
field X with dq_i/dt = dH/dp_i and dp_i/dt = -dH/dq_i.  A one-periodic
time-dependent Hamiltonian is represented as a cyclic sequence of autonomous
snapshots blended by a smooth partition of unity in t.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import SingularPointError
from .phase_space import PhasePoint, PhaseSpaceConfig, state_periods
from .profiles import RadialProfile

#: Charts of the three-chart form must agree to this tolerance on seams.
CHART_AGREEMENT_TOL = 1e-9
#: Finite-difference step used for sampled-grid momentum derivatives.
GRID_FD_STEP = 1e-5


@dataclass(frozen=True)
class VectorFieldValue:
    """Phase velocity at a point, split by coordinate."""

    dp0: float
    dq0: float
    dp: tuple
    dq: tuple

    def to_state(self) -> np.ndarray:
        z = np.empty(2 * len(self.dp) + 2)
        z[0] = self.dp0
        z[1] = self.dq0
        z[2::2] = self.dp
        z[3::2] = self.dq
        return z

    @classmethod
    def from_state(cls, z) -> "VectorFieldValue":
        z = np.asarray(z, dtype=float)
        return cls(dp0=float(z[0]), dq0=float(z[1]),
                   dp=tuple(z[2::2]), dq=tuple(z[3::2]))


def _as_states(x, dim) -> tuple:
    """Coerce a PhasePoint / state / batch into a (N, dim) array."""
    if isinstance(x, PhasePoint):
        arr = x.to_state()[None, :]
        return arr, True
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        return arr[None, :], True
    return arr, False


def _wrap_centered(values, period):
    """Reduce to the centered representative in [-period/2, period/2)."""
    return np.mod(values + period / 2.0, period) - period / 2.0


@dataclass(frozen=True)
class OuterRadialForm:
    """H(p, q) = profile(p0 / scale)."""

    profile: RadialProfile
    scale: float

    @property
    def q_independent(self) -> bool:
        return True

    def value(self, geometry, states):
        return self.profile.value(states[:, 0] / self.scale)

    def grad_p(self, geometry, states):
        g = np.zeros((states.shape[0], geometry.n + 1))
        g[:, 0] = self.profile.slope(states[:, 0] / self.scale) / self.scale
        return g

    def grad_q(self, geometry, states):
        return np.zeros((states.shape[0], geometry.n + 1))


@dataclass(frozen=True)
class ThreeChartForm:
    """Marked-center bump, two outer ramps, and a constant middle plateau."""

    profile: RadialProfile
    middle_level: float

    @property
    def q_independent(self) -> bool:
        return True

    def _regions(self, geometry, states):
        R, u, n = geometry.R, geometry.u, geometry.n
        au = abs(u)
        m_u = geometry.m_u
        dp = np.empty((states.shape[0], n + 1))
        dp[:, 0] = states[:, 0] - u
        dp[:, 1:] = _wrap_centered(states[:, 2::2], 2.0)
        rho = np.sqrt(np.sum(dp * dp, axis=1))
        p0 = states[:, 0]
        in_bump = rho <= m_u / 2.0
        in_hi = ~in_bump & (p0 >= (R + au) / 2.0)
        in_lo = ~in_bump & ~in_hi & (p0 <= -(R + au) / 2.0)
        return dp, rho, in_bump, in_hi, in_lo

    def value(self, geometry, states):
        R, u = geometry.R, geometry.u
        au = abs(u)
        m_u = geometry.m_u
        dp, rho, in_bump, in_hi, in_lo = self._regions(geometry, states)
        out = np.full(states.shape[0], self.middle_level, dtype=float)
        out[in_bump] = self.profile.value(rho[in_bump] / m_u)
        p0 = states[:, 0]
        out[in_hi] = self.profile.value((p0[in_hi] - au) / (R - au))
        out[in_lo] = self.profile.value((p0[in_lo] + au) / (R - au))
        return out

    def grad_p(self, geometry, states):
        R, u, n = geometry.R, geometry.u, geometry.n
        au = abs(u)
        m_u = geometry.m_u
        dp, rho, in_bump, in_hi, in_lo = self._regions(geometry, states)
        g = np.zeros((states.shape[0], n + 1))
        if np.any(in_bump):
            rr = rho[in_bump]
            fp = self.profile.slope(rr / m_u) / m_u
            center = rr < 1e-300
            if np.any(center):
                if abs(self.profile.slope(0.0)) > 1e-12:
                    raise SingularPointError(
                        "vector field at the chart center needs f'(0) = 0"
                    )
                fp = np.where(center, 0.0, fp)
            ratio = np.where(center, 0.0, fp / np.where(center, 1.0, rr))
            g[in_bump] = dp[in_bump] * ratio[:, None]
        p0 = states[:, 0]
        g[in_hi, 0] = self.profile.slope((p0[in_hi] - au) / (R - au)) / (R - au)
        g[in_lo, 0] = self.profile.slope((p0[in_lo] + au) / (R - au)) / (R - au)
        return g

    def grad_q(self, geometry, states):
        return np.zeros((states.shape[0], geometry.n + 1))


@dataclass(frozen=True)
class CosineMode:
    """One angle mode amp * cos(2 pi k . q + phase) carried by a momentum envelope."""

    amplitude: float
    wavevector: tuple  # n+1 integers, one per angle q0..qn
    phase: float
    envelope: Optional[np.ndarray] = None  # same shape as the value grid


@dataclass(frozen=True)
class SampledGridForm:
    """Multilinear interpolation over the momentum box with optional angle modes.

    ``p0_nodes`` spans a closed subinterval of (-R, R); the torus momenta use
    uniform periodic nodes implied by the grid shape (period 2).  Outside the
    p0 node range the Hamiltonian is zero.  Momentum derivatives are central
    finite differences of the interpolant; angle derivatives come from the
    cosine modes analytically.
    """

    p0_nodes: np.ndarray
    values: np.ndarray
    modes: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "p0_nodes", np.asarray(self.p0_nodes, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.shape[0] != self.p0_nodes.shape[0]:
            raise ValueError("values first axis must match p0_nodes")

    @property
    def q_independent(self) -> bool:
        return len(self.modes) == 0

    def _interp(self, grid, p):
        """Multilinear interpolation; p columns are (p0, p1..pn)."""
        npts = p.shape[0]
        ndim = p.shape[1]
        x0 = self.p0_nodes
        idx0 = np.clip(np.searchsorted(x0, p[:, 0], side="right") - 1, 0, len(x0) - 2)
        t0 = (p[:, 0] - x0[idx0]) / (x0[idx0 + 1] - x0[idx0])
        inside = (p[:, 0] >= x0[0]) & (p[:, 0] <= x0[-1])
        t0 = np.clip(t0, 0.0, 1.0)
        indices = [(idx0, t0)]
        for axis in range(1, ndim):
            m = grid.shape[axis]
            pos = np.mod(p[:, axis], 2.0) / 2.0 * m
            base = np.floor(pos).astype(int) % m
            indices.append((base, pos - np.floor(pos)))
        out = np.zeros(npts)
        for corner in range(2 ** ndim):
            weight = np.ones(npts)
            ix = []
            for axis, (base, frac) in enumerate(indices):
                bit = (corner >> axis) & 1
                if axis == 0:
                    ix.append(np.minimum(base + bit, grid.shape[0] - 1))
                else:
                    ix.append((base + bit) % grid.shape[axis])
                weight = weight * (frac if bit else (1.0 - frac))
            out += weight * grid[tuple(ix)]
        return np.where(inside, out, 0.0)

    def value(self, geometry, states):
        p = np.column_stack([states[:, 0], states[:, 2::2]])
        out = self._interp(self.values, p)
        for mode in self.modes:
            k = np.asarray(mode.wavevector, dtype=float)
            qs = np.column_stack([states[:, 1], states[:, 3::2]])
            osc = mode.amplitude * np.cos(2.0 * np.pi * qs @ k + mode.phase)
            env = self._interp(mode.envelope, p) if mode.envelope is not None else 1.0
            out = out + osc * env
        return out

    def grad_p(self, geometry, states):
        n1 = geometry.n + 1
        g = np.empty((states.shape[0], n1))
        for i in range(n1):
            col = 0 if i == 0 else 2 * i
            hi = states.copy()
            lo = states.copy()
            hi[:, col] += GRID_FD_STEP
            lo[:, col] -= GRID_FD_STEP
            g[:, i] = (self.value(geometry, hi) - self.value(geometry, lo)) / (2 * GRID_FD_STEP)
        return g

    def grad_q(self, geometry, states):
        n1 = geometry.n + 1
        g = np.zeros((states.shape[0], n1))
        if not self.modes:
            return g
        p = np.column_stack([states[:, 0], states[:, 2::2]])
        qs = np.column_stack([states[:, 1], states[:, 3::2]])
        for mode in self.modes:
            k = np.asarray(mode.wavevector, dtype=float)
            osc = -mode.amplitude * np.sin(2.0 * np.pi * qs @ k + mode.phase)
            env = self._interp(mode.envelope, p) if mode.envelope is not None else 1.0
            g += (2.0 * np.pi * osc * env)[:, None] * k[None, :]
        return g


@dataclass(frozen=True)
class ProductHamiltonian:
    """An autonomous Hamiltonian on the annulus-torus phase space."""

    geometry: PhaseSpaceConfig
    form: object

    @property
    def q_independent(self) -> bool:
        return self.form.q_independent

    def value(self, x, t: float = 0.0):
        states, single = _as_states(x, self.geometry.dim)
        out = self.form.value(self.geometry, states)
        return float(out[0]) if single else out

    def grad_p(self, x, t: float = 0.0):
        states, single = _as_states(x, self.geometry.dim)
        out = self.form.grad_p(self.geometry, states)
        return out[0] if single else out

    def vector_field(self, x, t: float = 0.0):
        states, single = _as_states(x, self.geometry.dim)
        gp = self.form.grad_p(self.geometry, states)
        gq = self.form.grad_q(self.geometry, states)
        field = np.empty_like(states)
        field[:, 0::2] = -gq
        field[:, 1::2] = gp
        return field[0] if single else field

    def marked_infimum(self) -> float:
        """Infimum of H over the marked set p0 = u, torus p = 0 (all angles)."""
        geo = self.geometry
        if self.q_independent:
            state = np.zeros(geo.dim)
            state[0] = geo.u
            return self.value(state)
        grid = np.linspace(0.0, 1.0, 33)[:-1]
        mesh = np.meshgrid(*([grid] * (geo.n + 1)), indexing="ij")
        qs = np.column_stack([m.ravel() for m in mesh])
        states = np.zeros((qs.shape[0], geo.dim))
        states[:, 0] = geo.u
        states[:, 1] = qs[:, 0]
        states[:, 3::2] = qs[:, 1:]
        return float(np.min(self.value(states)))

    def support_report(self, collar: float = 0.02, samples: int = 101) -> dict:
        """Largest |H| on a collar grid near the annulus boundary p0 = +-R."""
        geo = self.geometry
        rng = np.random.default_rng(0)
        worst = 0.0
        for side in (-1.0, 1.0):
            p0 = side * geo.R * (1.0 - collar * np.linspace(0.0, 1.0, samples))
            states = np.zeros((samples, geo.dim))
            states[:, 0] = p0
            states[:, 2::2] = rng.uniform(0.0, 2.0, size=(samples, geo.n))
            states[:, 1::2] = rng.uniform(0.0, 1.0, size=(samples, geo.n + 1))
            worst = max(worst, float(np.max(np.abs(self.value(states)))))
        return {"collar": collar, "max_abs_H": worst, "vanishes": worst < 1e-12}

    # -- serialization -------------------------------------------------------

    def to_json(self) -> str:
        geo = {"R": self.geometry.R, "u": self.geometry.u, "n": self.geometry.n}
        if isinstance(self.form, OuterRadialForm):
            payload = {"form": "outer_radial", "geometry": geo,
                       "scale": self.form.scale,
                       "profile": json.loads(self.form.profile.to_json())}
        elif isinstance(self.form, ThreeChartForm):
            payload = {"form": "three_chart", "geometry": geo,
                       "middleLevel": self.form.middle_level,
                       "profile": json.loads(self.form.profile.to_json())}
        elif isinstance(self.form, SampledGridForm):
            payload = {
                "form": "sampled_grid", "geometry": geo,
                "p0Nodes": self.form.p0_nodes.tolist(),
                "values": self.form.values.tolist(),
                "axes": list(self.form.values.shape),
                "modes": [
                    {"amplitude": mo.amplitude, "wavevector": list(mo.wavevector),
                     "phase": mo.phase,
                     "envelope": None if mo.envelope is None else mo.envelope.tolist()}
                    for mo in self.form.modes
                ],
            }
        else:
            raise TypeError(f"cannot serialize form {type(self.form)}")
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ProductHamiltonian":
        data = json.loads(text)
        geo = PhaseSpaceConfig(**data["geometry"])
        kind = data["form"]
        if kind == "outer_radial":
            profile = RadialProfile.from_json(json.dumps(data["profile"]))
            return outer_radial(geo, profile, scale=data["scale"])
        if kind == "three_chart":
            profile = RadialProfile.from_json(json.dumps(data["profile"]))
            return three_chart(geo, profile, middle_level=data["middleLevel"])
        if kind == "sampled_grid":
            modes = tuple(
                CosineMode(amplitude=mo["amplitude"],
                           wavevector=tuple(mo["wavevector"]), phase=mo["phase"],
                           envelope=None if mo["envelope"] is None
                           else np.array(mo["envelope"], dtype=float))
                for mo in data["modes"]
            )
            form = SampledGridForm(p0_nodes=np.array(data["p0Nodes"], dtype=float),
                                   values=np.array(data["values"], dtype=float),
                                   modes=modes)
            return cls(geometry=geo, form=form)
        raise ValueError(f"unknown form {kind!r}")


def outer_radial(geometry: PhaseSpaceConfig, profile: RadialProfile,
                 scale: Optional[float] = None) -> ProductHamiltonian:
    """Radial Hamiltonian H = f(p0 / scale); scale defaults to R."""
    scale = geometry.R if scale is None else float(scale)
    return ProductHamiltonian(geometry=geometry,
                              form=OuterRadialForm(profile=profile, scale=scale))


def three_chart(geometry: PhaseSpaceConfig, profile: RadialProfile,
                middle_level: float) -> ProductHamiltonian:
    """Three-chart Hamiltonian; asserts the charts agree on their seams."""
    seam = profile.value(0.5)
    if abs(seam - middle_level) > CHART_AGREEMENT_TOL * max(1.0, abs(middle_level)):
        raise ValueError(
            f"profile value {seam} at r=1/2 must equal the middle level {middle_level}"
        )
    return ProductHamiltonian(geometry=geometry,
                              form=ThreeChartForm(profile=profile,
                                                  middle_level=middle_level))


def sampled_grid(geometry: PhaseSpaceConfig, p0_nodes, values,
                 modes: Sequence[CosineMode] = ()) -> ProductHamiltonian:
    return ProductHamiltonian(
        geometry=geometry,
        form=SampledGridForm(p0_nodes=np.asarray(p0_nodes, dtype=float),
                             values=np.asarray(values, dtype=float),
                             modes=tuple(modes)),
    )


def reference_hamiltonian(geometry: PhaseSpaceConfig, family, s: float,
                          c: float, ell: int = 1) -> ProductHamiltonian:
    """Standard family member: outer-radial for s >= 1, three-chart for s <= -1."""
    from .profiles import ProfileFamilySpec, build_profile

    spec = ProfileFamilySpec(family=family, s=s, c=c, geometry=geometry, ell=ell)
    profile = build_profile(spec)
    if s >= 1.0:
        return outer_radial(geometry, profile)
    return three_chart(geometry, profile, middle_level=s)


# -- function-style wrappers matching the operation contracts ----------------


def eval_hamiltonian(H: ProductHamiltonian, x) -> float:
    return H.value(x)


def hamiltonian_vector_field(H: ProductHamiltonian, x) -> VectorFieldValue:
    return VectorFieldValue.from_state(H.vector_field(x))


def inf_over_marked_set(H: ProductHamiltonian) -> float:
    return H.marked_infimum()


@dataclass(frozen=True)
class TimePeriodicHamiltonian:
    """One-periodic time dependence: autonomous snapshots blended smoothly.

    Snapshot k is centered at t = k / K and weighted by the C^1 partition of
    unity w(s) = (1 + cos(pi s)) / 2 on |s| <= 1 in units of the snapshot
    spacing.
    """

    snapshots: tuple

    def __post_init__(self):
        if not self.snapshots:
            raise ValueError("need at least one snapshot")
        geo = self.snapshots[0].geometry
        if any(h.geometry != geo for h in self.snapshots):
            raise ValueError("snapshots must share one geometry")

    @property
    def geometry(self) -> PhaseSpaceConfig:
        return self.snapshots[0].geometry

    @property
    def q_independent(self) -> bool:
        return all(h.q_independent for h in self.snapshots)

    def _weights(self, t: float):
        K = len(self.snapshots)
        out = []
        for k in range(K):
            s = (t * K - k) % K
            if s > K / 2.0:
                s -= K
            if abs(s) < 1.0:
                out.append((k, 0.5 * (1.0 + math.cos(math.pi * s))))
        return out

    def value(self, x, t: float = 0.0):
        return sum(w * self.snapshots[k].value(x) for k, w in self._weights(t))

    def vector_field(self, x, t: float = 0.0):
        parts = [(w, self.snapshots[k].vector_field(x)) for k, w in self._weights(t)]
        out = parts[0][0] * parts[0][1]
        for w, f in parts[1:]:
            out = out + w * f
        return out

    def marked_infimum(self) -> float:
        return min(h.marked_infimum() for h in self.snapshots)
