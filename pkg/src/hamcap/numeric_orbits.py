"""Numeric periodic-orbit machinery: flows, time-one maps, shooting, actions.

Integration uses the implicit midpoint rule, a second-order symplectic
one-step method.  Each step solves its implicit equation by fixed-point
iteration with a damped-Newton fallback (finite-difference Jacobian of the
vector field).  States are integrated in lifted coordinates: no modular
wrapping happens mid-trajectory, so windings are read off the endpoints.

For angle-independent Hamiltonians the momenta are exactly conserved and the
implicit midpoint update collapses to the closed form

    p(1) = p(0),   q(1) = q(0) + grad_p H(p(0)),

which the integrator reproduces to machine precision.  ``time_one_map`` uses
that closed form directly whenever the Hamiltonian is angle-independent (a
regression test pins it against the stepped integrator); shooting sweeps over
thousands of seeds run on this fast path.

The action of a lifted loop is computed against the reference loop at the
zero level, A = int H dt - sum_i oint p_i dq_i, by trapezoidal quadrature.
For a constant-momentum orbit this evaluates exactly to H - p0 * ell.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NewtonDivergenceError
from .hamiltonians import ProductHamiltonian, TimePeriodicHamiltonian
from .phase_space import (HomotopyClass, LoopSample, PhasePoint, as_class,
                          wrap_state)

#: Residual below which a shooting run counts as converged.
SHOOTING_RESIDUAL_TOL = 1e-9
#: Singular values of (dPhi - id) below this count toward the family kernel.
KERNEL_SV_TOL = 1e-4


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step implicit midpoint settings."""

    step_count: int = 512
    newton_tol: float = 1e-12
    newton_max_iter: int = 50

    def __post_init__(self):
        if self.step_count < 16:
            raise ValueError("need at least 16 steps per unit time")


DEFAULT_CONFIG = IntegratorConfig()


@dataclass(frozen=True)
class Trajectory:
    """A lifted flow trajectory over [0, 1]."""

    times: np.ndarray
    states: np.ndarray  # (steps+1, dim), lifted

    @property
    def start(self) -> np.ndarray:
        return self.states[0]

    @property
    def end(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class ShootingResult:
    """Outcome of one winding-constrained shooting run."""

    converged: bool
    residual: float
    level: float
    action: Optional[float]
    orbit: Optional[LoopSample]
    kernel_dim: Optional[int]
    iterations: int
    seed: np.ndarray


def default_rng(seed=None) -> np.random.Generator:
    """RNG honoring the HAMCAP_SEED environment variable."""
    if seed is None:
        env = os.environ.get("HAMCAP_SEED")
        seed = int(env) if env else 0
    return np.random.default_rng(seed)


def _field(H, states, t):
    return H.vector_field(states, t)


def _step_batch(H, states, t0, h, config):
    """One implicit midpoint step for a batch of states."""
    guess = states + h * _field(H, states, t0 + 0.5 * h)
    prev = states
    for _ in range(config.newton_max_iter):
        mid = 0.5 * (states + guess)
        new = states + h * _field(H, mid, t0 + 0.5 * h)
        delta = np.max(np.abs(new - guess), axis=-1)
        guess = new
        if np.all(delta <= config.newton_tol):
            return guess
        if np.max(np.abs(new - prev)) > 1e6:
            break
        prev = new
    # fixed point did not settle everywhere: damped Newton on the stragglers
    bad = delta > config.newton_tol
    idx = np.nonzero(np.atleast_1d(bad))[0]
    guess = np.atleast_2d(guess)
    states2 = np.atleast_2d(states)
    for i in idx:
        guess[i] = _step_newton(H, states2[i], t0, h, config)
    return guess.reshape(states.shape)


def _step_newton(H, z0, t0, h, config):
    d = z0.shape[0]
    y = z0 + h * H.vector_field(z0, t0 + 0.5 * h)

    def residual(y):
        return y - z0 - h * H.vector_field(0.5 * (z0 + y), t0 + 0.5 * h)

    r = residual(y)
    for _ in range(config.newton_max_iter):
        if np.max(np.abs(r)) <= config.newton_tol:
            return y
        eps = 1e-7
        J = np.empty((d, d))
        for col in range(d):
            dy = np.zeros(d)
            dy[col] = eps
            J[:, col] = (residual(y + dy) - r) / eps
        step = np.linalg.solve(J, -r)
        lam = 1.0
        for _ in range(20):
            y_try = y + lam * step
            r_try = residual(y_try)
            if np.max(np.abs(r_try)) < np.max(np.abs(r)):
                y, r = y_try, r_try
                break
            lam *= 0.5
        else:
            raise NewtonDivergenceError("implicit midpoint step stalled")
    raise NewtonDivergenceError("implicit midpoint step did not converge")


def integrate_flow(H, x0, config: IntegratorConfig = DEFAULT_CONFIG) -> Trajectory:
    """Integrate the Hamiltonian flow over [0, 1] from one start point.

    Output states are lifted (never wrapped); the Hamiltonian handles
    periodic coordinates internally.
    """
    if isinstance(x0, PhasePoint):
        x0 = x0.to_state()
    z = np.asarray(x0, dtype=float).copy()
    S = config.step_count
    h = 1.0 / S
    times = np.arange(S + 1) / S
    out = np.empty((S + 1, z.shape[0]))
    out[0] = z
    for k in range(S):
        z = _step_batch(H, z, times[k], h, config)
        out[k + 1] = z
    return Trajectory(times=times, states=out)


def integrate_flow_batch(H, states, config: IntegratorConfig = DEFAULT_CONFIG):
    """Endpoint-only batched integration of many starts over [0, 1]."""
    z = np.asarray(states, dtype=float).copy()
    S = config.step_count
    h = 1.0 / S
    for k in range(S):
        z = _step_batch(H, z, k * h, h, config)
    return z


def time_one_map(H, states, config: IntegratorConfig = DEFAULT_CONFIG,
                 force_integration: bool = False):
    """Lifted time-one map of the flow, batched over rows of ``states``.

    Angle-independent Hamiltonians use the closed form (momenta fixed,
    angles advanced by the momentum gradient), which equals the stepped
    implicit-midpoint map exactly; otherwise the flow is integrated.
    """
    states = np.asarray(states, dtype=float)
    single = states.ndim == 1
    batch = np.atleast_2d(states)
    if H.q_independent and not force_integration and not isinstance(H, TimePeriodicHamiltonian):
        out = batch.copy()
        out[:, 1::2] += H.grad_p(batch)
        return out[0] if single else out
    out = integrate_flow_batch(H, batch, config)
    return out[0] if single else out


def loop_action(H, loop: LoopSample) -> float:
    """Action of a lifted loop: int_0^1 H dt minus the lifted area sum.

    The reference loop is the uniform q0 drift at the zero momentum level,
    for which the area term reduces to sum_i oint p_i dq_i on lifts.
    """
    states = loop.states
    times = loop.times
    h_vals = H.value(states) if not isinstance(H, TimePeriodicHamiltonian) else \
        np.array([H.value(z, t) for z, t in zip(states, times)])
    h_term = np.trapezoid(h_vals, times)
    p = states[:, 0::2]
    q = states[:, 1::2]
    area = np.sum(0.5 * (p[1:] + p[:-1]) * np.diff(q, axis=0))
    return float(h_term - area)


def _class_offset(ell, dim) -> np.ndarray:
    off = np.zeros(dim)
    off[1] = ell
    return off


def shoot_periodic_orbit(H, homotopy_class, seed,
                         config: IntegratorConfig = DEFAULT_CONFIG,
                         use_fast_map: bool = True) -> ShootingResult:
    """Damped Gauss-Newton search for a periodic orbit in a winding class.

    Solves G(z) = Phi(z) - z - (0, ell, 0, ...) = 0 in lifted coordinates
    with a finite-difference Jacobian and pseudoinverse steps (the Jacobian
    is rank-deficient along a family).  Non-convergence is reported in the
    result, not raised.
    """
    geo = H.geometry
    cls = as_class(homotopy_class, geo.n)
    if isinstance(seed, PhasePoint):
        seed = seed.to_state()
    z = np.asarray(seed, dtype=float).copy()
    offset = _class_offset(cls.ell, geo.dim)

    def G(y):
        return time_one_map(H, y, config, force_integration=not use_fast_map) - y - offset

    r = G(z)
    best = np.max(np.abs(r))
    iterations = 0
    stall = 0
    for iterations in range(1, config.newton_max_iter + 1):
        if best <= SHOOTING_RESIDUAL_TOL:
            break
        if abs(z[0]) >= geo.R:
            break
        d = z.shape[0]
        eps = 1e-7
        J = np.empty((d, d))
        for col in range(d):
            dz = np.zeros(d)
            dz[col] = eps
            J[:, col] = (G(z + dz) - r) / eps
        step, *_ = np.linalg.lstsq(J, -r, rcond=1e-10)
        lam = 1.0
        improved = False
        for _ in range(12):
            z_try = z + lam * step
            r_try = G(z_try)
            if np.max(np.abs(r_try)) < best:
                z, r = z_try, r_try
                best = np.max(np.abs(r))
                improved = True
                break
            lam *= 0.5
        if not improved:
            stall += 1
            if stall >= 3:
                break
    converged = bool(best <= SHOOTING_RESIDUAL_TOL and abs(z[0]) < geo.R)
    if not converged:
        return ShootingResult(converged=False, residual=float(best),
                              level=float(z[0]), action=None, orbit=None,
                              kernel_dim=None, iterations=iterations,
                              seed=np.asarray(seed, dtype=float))
    traj = integrate_flow(H, z, config)
    lifted = traj.states.copy()
    loop = LoopSample(times=traj.times, states=lifted, homotopy_class=cls)
    action = loop_action(H, loop)
    kernel_dim = orbit_kernel_dimension(H, z, config)
    level = float(np.mean(traj.states[:, 0]))
    return ShootingResult(converged=True, residual=float(best), level=level,
                          action=action, orbit=loop, kernel_dim=kernel_dim,
                          iterations=iterations,
                          seed=np.asarray(seed, dtype=float))


def orbit_kernel_dimension(H, z, config: IntegratorConfig = DEFAULT_CONFIG) -> int:
    """Dimension of ker(dPhi - id) at a periodic point, by SVD threshold.

    For a nondegenerate family this equals the dimension of the orbit
    manifold through the point.
    """
    d = z.shape[0]
    eps = 1e-6
    base = time_one_map(H, z, config)
    J = np.empty((d, d))
    for col in range(d):
        dz = np.zeros(d)
        dz[col] = eps
        J[:, col] = (time_one_map(H, z + dz, config) -
                     time_one_map(H, z - dz, config)) / (2 * eps)
    sv = np.linalg.svd(J - np.eye(d), compute_uv=False)
    return int(np.sum(sv < KERNEL_SV_TOL))


def lattice_seeds(geometry, budget: int, rng=None, margin: float = 0.01):
    """Deterministic momentum-lattice seeds at zero angles, jittered by rng.

    Half the budget goes to a dense p0 scan along the torus-momentum axis
    (every family of an angle-independent Hamiltonian crosses that axis, and
    the marked-center families live on it exactly); the rest fills a coarse
    lattice over the full momentum box.  Angle coordinates start at zero.
    """
    n1 = geometry.n + 1
    p0_lo = -geometry.R * (1 - margin)
    p0_hi = geometry.R * (1 - margin)
    per_axis = max(2, int(round((budget - budget // 2) ** (1.0 / n1))))
    n_axis = max(2, budget - per_axis ** n1)
    axis_p0 = np.linspace(p0_lo, p0_hi, n_axis)
    if rng is not None:
        axis_p0 = axis_p0 + rng.uniform(-0.25, 0.25, n_axis) * (axis_p0[1] - axis_p0[0])
        axis_p0 = np.clip(axis_p0, p0_lo, p0_hi)
    axis = np.zeros((n_axis, geometry.dim))
    axis[:, 0] = axis_p0

    remaining = budget - n_axis
    if remaining <= 0:
        return axis
    axes = [np.linspace(p0_lo, p0_hi, per_axis)]
    for _ in range(geometry.n):
        axes.append(np.linspace(0.0, 2.0, per_axis, endpoint=False))
    mesh = np.meshgrid(*axes, indexing="ij")
    ps = np.column_stack([m.ravel() for m in mesh])
    if rng is not None and ps.shape[0] > 0:
        steps = np.array([axes[i][1] - axes[i][0] if len(axes[i]) > 1 else 0.0
                          for i in range(n1)])
        ps = ps + rng.uniform(-0.25, 0.25, ps.shape) * steps
        ps[:, 0] = np.clip(ps[:, 0], p0_lo, p0_hi)
    lattice = np.zeros((ps.shape[0], geometry.dim))
    lattice[:, 0] = ps[:, 0]
    lattice[:, 2::2] = ps[:, 1:]
    return np.vstack([axis, lattice[:remaining]])


@dataclass(frozen=True)
class OrbitCluster:
    """One distinct orbit family discovered by a sweep."""

    level: float
    action: float
    torus_p: tuple
    kernel_dim: int
    residual: float
    count: int

    def to_dict(self) -> dict:
        return {"level": self.level, "action": self.action,
                "torusP": list(self.torus_p), "kernelDim": self.kernel_dim,
                "residual": self.residual, "count": self.count}


@dataclass(frozen=True)
class SweepResult:
    clusters: tuple
    converged_count: int
    seed_count: int
    ell: int

    def to_dict(self) -> dict:
        return {"ell": self.ell, "seedCount": self.seed_count,
                "convergedCount": self.converged_count,
                "clusters": [c.to_dict() for c in self.clusters]}


def _batched_newton_sweep(H, ell, seeds, config, max_iter):
    """Vectorized damped Gauss-Newton over all seeds on the fast time-one map."""
    geo = H.geometry
    d = geo.dim
    offset = _class_offset(ell, d)

    def G(z):
        return time_one_map(H, z, config) - z - offset

    z = seeds.copy()
    r = G(z)
    best = np.max(np.abs(r), axis=1)
    active = best > SHOOTING_RESIDUAL_TOL
    stall = np.zeros(len(z), dtype=int)
    eps = 1e-7
    lam_grid = 0.5 ** np.arange(9)
    for _ in range(max_iter):
        if not np.any(active):
            break
        za = z[active]
        ra = r[active]
        J = np.empty((za.shape[0], d, d))
        for col in range(d):
            dz = np.zeros(d)
            dz[col] = eps
            J[:, :, col] = (G(za + dz) - ra) / eps
        # Levenberg-regularized normal equations, batched
        JtJ = np.einsum("nij,nik->njk", J, J)
        Jtr = np.einsum("nij,ni->nj", J, ra)
        JtJ += 1e-12 * np.eye(d)
        try:
            step = np.linalg.solve(JtJ, -Jtr[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = -np.einsum("nij,ni->nj", np.linalg.pinv(JtJ), Jtr)
        improved = np.zeros(za.shape[0], dtype=bool)
        best_a = best[active].copy()
        z_new = za.copy()
        r_new = ra.copy()
        for lam in lam_grid:
            trial = za + lam * step
            r_try = G(trial)
            m = np.max(np.abs(r_try), axis=1)
            take = ~improved & (m < best_a)
            z_new[take] = trial[take]
            r_new[take] = r_try[take]
            best_a[take] = m[take]
            improved |= take
            if np.all(improved):
                break
        idx = np.nonzero(active)[0]
        z[idx] = z_new
        r[idx] = r_new
        best[idx] = best_a
        stall[idx[~improved]] += 1
        stall[idx[improved]] = 0
        escaped = np.abs(z[:, 0]) >= geo.R
        active = (best > SHOOTING_RESIDUAL_TOL) & (stall < 3) & ~escaped
    converged = (best <= SHOOTING_RESIDUAL_TOL) & (np.abs(z[:, 0]) < geo.R)
    return z, best, converged


def sweep_orbits(H, homotopy_class, seeds=None, seed_budget: int = 1000,
                 config: IntegratorConfig = DEFAULT_CONFIG, rng=None,
                 max_iter: int = 25) -> SweepResult:
    """Shooting sweep over many seeds with clustering of the hits.

    Distinct families are separated by level and torus momenta at tolerance
    1e-4.  For the trivial class, constant loops on the Hamiltonian's zero
    set converge everywhere with action zero; those hits are filtered out,
    matching the enumeration convention.
    """
    geo = H.geometry
    cls = as_class(homotopy_class, geo.n)
    if seeds is None:
        seeds = lattice_seeds(geo, seed_budget, rng=rng)
    seeds = np.asarray(seeds, dtype=float)
    if H.q_independent:
        z, best, converged = _batched_newton_sweep(H, cls.ell, seeds, config,
                                                   max_iter)
    else:
        results = [shoot_periodic_orbit(H, cls, s, config, use_fast_map=False)
                   for s in seeds]
        z = np.array([res.seed if res.orbit is None else res.orbit.states[0]
                      for res in results])
        best = np.array([res.residual for res in results])
        converged = np.array([res.converged for res in results])

    hits = z[converged]
    clusters = []
    if hits.shape[0]:
        residuals = best[converged]
        # preliminary level/action, exact for constant-momentum orbits
        prelim_action = H.value(hits) - hits[:, 0] * cls.ell if H.q_independent else \
            np.full(hits.shape[0], np.nan)
        if cls.ell == 0:
            keep = np.abs(prelim_action) > 1e-9
            hits, residuals, prelim_action = hits[keep], residuals[keep], prelim_action[keep]
        used = np.zeros(hits.shape[0], dtype=bool)
        for i in range(hits.shape[0]):
            if used[i]:
                continue
            if cls.ell == 0:
                # constant loops: one cluster per distinct action value
                sel = ~used & (np.abs(prelim_action - prelim_action[i]) < 1e-6)
            else:
                sel = ~used & (np.abs(hits[:, 0] - hits[i, 0]) < 1e-4)
                if np.any(np.isnan(prelim_action)):
                    sel &= np.all(np.abs(_torus_gap(hits[:, 2::2], hits[i, 2::2]))
                                  < 1e-4, axis=1)
                else:
                    sel &= np.abs(prelim_action - prelim_action[i]) < 1e-4
            used |= sel
            rep = hits[i]
            result = shoot_periodic_orbit(H, cls, rep, config)
            if not result.converged:
                continue
            if cls.ell == 0 and abs(result.action) < 1e-9:
                continue
            clusters.append(OrbitCluster(
                level=result.level, action=float(result.action),
                torus_p=tuple(np.round(np.mod(rep[2::2], 2.0), 6)),
                kernel_dim=result.kernel_dim,
                residual=float(np.max(residuals[sel])),
                count=int(np.sum(sel))))
    clusters.sort(key=lambda c: (c.level, c.action))
    return SweepResult(clusters=tuple(clusters),
                       converged_count=int(np.sum(converged)),
                       seed_count=int(seeds.shape[0]), ell=cls.ell)


def _torus_gap(values, ref):
    """Signed distance on the period-2 torus momenta."""
    return np.mod(values - ref + 1.0, 2.0) - 1.0


def energy_drift(H, starts, config: IntegratorConfig = DEFAULT_CONFIG) -> float:
    """Max |H(end) - H(start)| over batched unit-time flows (real integration)."""
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    ends = integrate_flow_batch(H, starts, config)
    return float(np.max(np.abs(H.value(ends) - H.value(starts))))


def time_one_jacobian_determinant(H, z, config: IntegratorConfig = DEFAULT_CONFIG,
                                  eps: float = 1e-6) -> float:
    """Determinant of the finite-difference time-one-map Jacobian (symplecticity proxy)."""
    z = np.asarray(z, dtype=float)
    d = z.shape[0]
    J = np.empty((d, d))
    for col in range(d):
        dz = np.zeros(d)
        dz[col] = eps
        hi = integrate_flow_batch(H, (z + dz)[None, :], config)[0]
        lo = integrate_flow_batch(H, (z - dz)[None, :], config)[0]
        J[:, col] = (hi - lo) / (2 * eps)
    return float(np.linalg.det(J))
