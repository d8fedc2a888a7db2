import numpy as np
import pytest

from hamcap.hamiltonians import (CosineMode, TimePeriodicHamiltonian,
                                 outer_radial, reference_hamiltonian,
                                 sampled_grid)
from hamcap.numeric_orbits import (IntegratorConfig, default_rng, energy_drift,
                                   integrate_flow, integrate_flow_batch,
                                   lattice_seeds, loop_action,
                                   orbit_kernel_dimension, shoot_periodic_orbit,
                                   sweep_orbits, time_one_jacobian_determinant,
                                   time_one_map)
from hamcap.orbit_analysis import enumerate_families, sample_representative
from hamcap.phase_space import (LoopSample, PhasePoint, PhaseSpaceConfig,
                                as_class, lift_loop)
from hamcap.profiles import ProfileFamily, profile_from_function

GEOM = PhaseSpaceConfig(R=1.0, u=0.0, n=1)


def parabola_hamiltonian():
    prof = profile_from_function(lambda r: 1 - r * r, lambda r: -2 * r,
                                 np.linspace(-1, 1, 9))
    return outer_radial(GEOM, prof, scale=1.0)


def zero_hamiltonian():
    prof = profile_from_function(lambda r: 0.0, lambda r: 0.0,
                                 np.linspace(-1, 1, 3))
    return outer_radial(GEOM, prof, scale=1.0)


def q_dependent_hamiltonian(n_nodes=33):
    p0n = np.linspace(-0.8, 0.8, n_nodes)
    vals = np.outer(np.exp(-4 * p0n**2), np.ones(8))
    mode = CosineMode(0.02, (1, 1), 0.0, vals * 0.5)
    return sampled_grid(GEOM, p0n, vals, modes=[mode])


class TestIntegrateFlow:
    def test_zero_hamiltonian_constant(self):
        H = zero_hamiltonian()
        traj = integrate_flow(H, PhasePoint(0.2, 0.3, (0.7,), (0.1,)))
        assert np.max(np.abs(traj.states - traj.states[0])) == 0.0

    def test_uniform_drift(self):
        H = parabola_hamiltonian()
        traj = integrate_flow(H, PhasePoint(-0.5, 0.0, (0.0,), (0.0,)))
        assert np.ptp(traj.states[:, 0]) == 0.0
        assert traj.states[-1, 1] == pytest.approx(1.0, abs=1e-12)
        # lifted output: q0 grows monotonically, no wrapping
        assert np.all(np.diff(traj.states[:, 1]) > 0)

    def test_energy_conservation_radial(self):
        H = reference_hamiltonian(GEOM, ProfileFamily.PLATEAU, s=-4.0, c=1.0)
        rng = default_rng(10)
        starts = lattice_seeds(GEOM, 1000, rng=rng)
        assert energy_drift(H, starts) <= 1e-8

    def test_energy_drift_small_q_dependent(self):
        H = q_dependent_hamiltonian()
        start = np.array([[0.1, 0.2, 0.5, 0.3]])
        assert energy_drift(H, start, IntegratorConfig(step_count=256)) <= 1e-5

    def test_step_count_floor(self):
        with pytest.raises(ValueError):
            IntegratorConfig(step_count=8)


class TestTimeOneMap:
    def test_fast_path_matches_integration(self):
        for family, s in [(ProfileFamily.PLATEAU, -4.0),
                          (ProfileFamily.BUMP, 2.0)]:
            H = reference_hamiltonian(GEOM, family, s=s, c=1.0)
            rng = default_rng(3)
            states = lattice_seeds(GEOM, 50, rng=rng)
            fast = time_one_map(H, states)
            slow = time_one_map(H, states, force_integration=True)
            # stepping sums 512 increments of a slope up to ~1e2, so the two
            # agree to accumulation roundoff
            assert np.max(np.abs(fast - slow)) <= 1e-11

    def test_symplecticity_determinant_radial(self):
        H = reference_hamiltonian(GEOM, ProfileFamily.PLATEAU, s=-2.0, c=1.0)
        rng = default_rng(8)
        for z in lattice_seeds(GEOM, 5, rng=rng):
            det = time_one_jacobian_determinant(H, z)
            assert abs(det - 1.0) <= 1e-5

    def test_symplecticity_determinant_grid(self):
        # multilinear interpolation carries curvature kinks; the proxy is
        # still close to volume preserving
        H = q_dependent_hamiltonian()
        det = time_one_jacobian_determinant(
            H, np.array([0.1, 0.2, 0.5, 0.3]), IntegratorConfig(step_count=256))
        assert abs(det - 1.0) <= 1e-4


class TestShooting:
    def test_converges_to_known_orbit(self):
        H = parabola_hamiltonian()
        res = shoot_periodic_orbit(H, 1, PhasePoint(-0.42, 0.1, (0.3,), (0.2,)))
        assert res.converged
        assert res.level == pytest.approx(-0.5, abs=1e-6)
        assert res.action == pytest.approx(1.25, abs=1e-6)
        assert res.residual <= 1e-9
        assert res.kernel_dim == 3

    def test_zero_hamiltonian_no_orbit(self):
        res = shoot_periodic_orbit(zero_hamiltonian(), 1,
                                   PhasePoint(0.0, 0.0, (0.0,), (0.0,)))
        assert not res.converged
        assert res.orbit is None

    def test_orbit_winding_is_class(self):
        H = reference_hamiltonian(GEOM, ProfileFamily.PLATEAU, s=-4.0, c=1.0)
        fams = enumerate_families(H, 1)
        seed = sample_representative(H, fams[0]).states[0] + \
            np.array([1e-3, 0, 0, 0])
        res = shoot_periodic_orbit(H, 1, seed)
        assert res.converged
        lifted = res.orbit.states
        assert lifted[-1, 1] - lifted[0, 1] == pytest.approx(1.0, abs=1e-9)
        assert np.max(np.abs(lifted[-1, 2:] - lifted[0, 2:])) <= 1e-9

    def test_kernel_dimension_matches_family(self):
        H = reference_hamiltonian(GEOM, ProfileFamily.PLATEAU, s=-4.0, c=1.0)
        for fam in enumerate_families(H, 1):
            z = sample_representative(H, fam).states[0]
            assert orbit_kernel_dimension(H, z) == fam.dimension


class TestLoopAction:
    def test_constant_loop_action_is_value(self):
        H = reference_hamiltonian(GEOM, ProfileFamily.BUMP, s=2.0, c=1.0)
        states = np.zeros((33, 4))
        states[:, 0] = 0.0
        loop = LoopSample(times=np.linspace(0, 1, 33), states=states,
                          homotopy_class=as_class(0, 1))
        assert loop_action(H, loop) == pytest.approx(3.0)

    def test_drift_orbit_closed_form(self):
        H = parabola_hamiltonian()
        K = 256
        ts = np.arange(K) / K
        pts = [PhasePoint(-0.5, t % 1.0, (0.0,), (0.0,)) for t in ts]
        loop = lift_loop(pts, as_class(1, 1))
        assert loop_action(H, loop) == pytest.approx(1.25, abs=1e-12)

    def test_reparametrization_invariance(self):
        # same image traversed at nonuniform speed: same action
        H = parabola_hamiltonian()
        K = 512
        ts = np.arange(K) / K
        warp = ts + 0.05 * np.sin(2 * np.pi * ts) ** 2
        pts = [PhasePoint(-0.5, w % 1.0, (0.0,), (0.0,)) for w in warp]
        loop = lift_loop(pts, as_class(1, 1))
        assert loop_action(H, loop) == pytest.approx(1.25, abs=1e-8)

    def test_action_shifts_with_constant(self):
        # adding a constant on the support shifts actions by that constant
        p0n = np.linspace(-0.8, 0.8, 17)
        base_vals = np.outer(np.exp(-4 * p0n**2), np.ones(8))
        H = sampled_grid(GEOM, p0n, base_vals)
        H_shift = sampled_grid(GEOM, p0n, base_vals + 0.25)
        states = np.zeros((65, 4))
        states[:, 0] = 0.3
        loop = LoopSample(times=np.linspace(0, 1, 65), states=states,
                          homotopy_class=as_class(0, 1))
        assert loop_action(H_shift, loop) - loop_action(H, loop) == \
            pytest.approx(0.25, abs=1e-12)


class TestSweep:
    def test_rediscovers_families(self):
        H = reference_hamiltonian(GEOM, ProfileFamily.PLATEAU, s=-4.0, c=1.0,
                                  ell=1)
        sweep = sweep_orbits(H, 1, seed_budget=1000, rng=default_rng(7))
        fams = enumerate_families(H, 1)
        got = sorted((round(c.level, 6), round(c.action, 6))
                     for c in sweep.clusters)
        want = sorted((round(f.level, 6), round(f.action, 6)) for f in fams)
        assert got == want
        for cluster, fam in zip(sweep.clusters,
                                sorted(fams, key=lambda f: f.level)):
            assert cluster.kernel_dim == fam.dimension

    def test_sharpness_absence(self):
        from hamcap.profiles import build_sharpness_profile

        prof = build_sharpness_profile(GEOM, 1, float("-inf"), 0.1)
        H = outer_radial(GEOM, prof, scale=1.0)
        sweep = sweep_orbits(H, 1, seed_budget=1000, rng=default_rng(5))
        assert sweep.converged_count == 0
        assert sweep.clusters == ()

    def test_trivial_class_filters_zero_actions(self):
        H = reference_hamiltonian(GEOM, ProfileFamily.BUMP, s=-2.0, c=1.0)
        sweep = sweep_orbits(H, 0, seed_budget=500, rng=default_rng(6))
        actions = sorted(c.action for c in sweep.clusters)
        assert actions == pytest.approx([-2.0, H.form.profile.value(0.0)])
        assert all(abs(a) > 1e-9 for a in actions)

    def test_q_dependent_sweep_runs(self):
        H = q_dependent_hamiltonian(17)
        seeds = lattice_seeds(GEOM, 6, rng=default_rng(3))
        sweep = sweep_orbits(H, 0, seeds=seeds,
                             config=IntegratorConfig(step_count=64))
        assert sweep.seed_count == 6

    def test_result_serialization(self):
        H = reference_hamiltonian(GEOM, ProfileFamily.PLATEAU, s=-2.0, c=1.0)
        sweep = sweep_orbits(H, 1, seed_budget=200, rng=default_rng(2))
        d = sweep.to_dict()
        assert d["seedCount"] == 200
        assert isinstance(d["clusters"], list)


class TestTimePeriodicIntegration:
    def test_blended_flow_runs_and_stays_bounded(self):
        H1 = reference_hamiltonian(GEOM, ProfileFamily.BUMP, s=2.0, c=1.0)
        H2 = reference_hamiltonian(GEOM, ProfileFamily.BUMP, s=3.0, c=1.0)
        TH = TimePeriodicHamiltonian(snapshots=(H1, H2))
        traj = integrate_flow(TH, PhasePoint(-0.5, 0.0, (0.0,), (0.0,)),
                              IntegratorConfig(step_count=64))
        assert traj.states.shape == (65, 4)
        assert np.max(np.abs(traj.states[:, 0])) < 1.0
        # time-dependent map must integrate, not use the autonomous shortcut
        out = time_one_map(TH, traj.states[0], IntegratorConfig(step_count=64))
        assert np.allclose(out, traj.states[-1])
