import numpy as np
import pytest

from hamcap.hamiltonians import (CosineMode, ProductHamiltonian,
                                 TimePeriodicHamiltonian, eval_hamiltonian,
                                 hamiltonian_vector_field, inf_over_marked_set,
                                 outer_radial, reference_hamiltonian,
                                 sampled_grid, three_chart)
from hamcap.phase_space import PhasePoint, PhaseSpaceConfig
from hamcap.profiles import (ProfileFamily, ProfileFamilySpec, build_profile,
                             build_sharpness_profile, profile_from_function)

GEOM = PhaseSpaceConfig(R=1.0, u=0.0, n=1)


def parabola_hamiltonian():
    prof = profile_from_function(lambda r: 1 - r * r, lambda r: -2 * r,
                                 np.linspace(-1, 1, 9))
    return outer_radial(GEOM, prof, scale=1.0)


class TestEvaluation:
    def test_outer_radial_value(self):
        H = parabola_hamiltonian()
        assert H.value(PhasePoint(0.5, 0.1, (0.3,), (0.9,))) == pytest.approx(0.75)

    def test_three_chart_middle_band(self):
        H = reference_hamiltonian(GEOM, ProfileFamily.BUMP, s=-2.0, c=1.0)
        pt = PhasePoint(0.7, 0.0, (1.0,), (0.0,))
        assert eval_hamiltonian(H, pt) == -2.0

    def test_three_chart_center_above_level(self):
        H = reference_hamiltonian(GEOM, ProfileFamily.BUMP, s=-2.0, c=1.0)
        center = PhasePoint(0.0, 0.4, (0.0,), (0.6,))
        assert eval_hamiltonian(H, center) > 1.0

    def test_three_chart_seam_agreement(self):
        # chart formulas agree where their regions touch
        geom = PhaseSpaceConfig(R=1.0, u=0.3, n=1)
        H = reference_hamiltonian(geom, ProfileFamily.PLATEAU, s=-2.0, c=1.0)
        prof = H.form.profile
        m_u = geom.m_u
        rng = np.random.default_rng(9)
        for _ in range(1000):
            # points on the bump-chart boundary sphere
            vec = rng.normal(size=2)
            vec *= (m_u / 2) / np.linalg.norm(vec)
            state = np.array([geom.u + vec[0], rng.uniform(), vec[1] % 2.0,
                              rng.uniform()])
            assert abs(H.value(state) - prof.value(0.5)) <= 1e-9
        # outer-chart boundary plane
        p0 = (geom.R + abs(geom.u)) / 2
        state = np.array([p0, 0.0, 1.7, 0.2])
        assert abs(H.value(state) - prof.value(0.5)) <= 1e-9

    def test_q_independence(self):
        H = reference_hamiltonian(GEOM, ProfileFamily.PLATEAU, s=-2.0, c=1.0)
        rng = np.random.default_rng(2)
        states = np.zeros((100, 4))
        states[:, 0] = 0.4
        states[:, 2] = 0.7
        states[:, 1::2] = rng.uniform(0, 1, (100, 2))
        assert np.ptp(H.value(states)) == 0.0


class TestVectorField:
    def test_outer_radial_field(self):
        H = parabola_hamiltonian()
        v = hamiltonian_vector_field(H, PhasePoint(-0.5, 0.0, (0.0,), (0.0,)))
        assert v.dq0 == pytest.approx(1.0)
        assert v.dp0 == 0.0 and v.dp == (0.0,) and v.dq == (0.0,)

    def test_middle_band_field_vanishes(self):
        H = reference_hamiltonian(GEOM, ProfileFamily.PLATEAU, s=-2.0, c=1.0)
        v = hamiltonian_vector_field(H, PhasePoint(0.55, 0.2, (1.2,), (0.8,)))
        assert np.all(v.to_state() == 0.0)

    def test_q_independent_has_zero_dp(self):
        for family, s in [(ProfileFamily.BUMP, 2.0), (ProfileFamily.BUMP, -2.0),
                          (ProfileFamily.PLATEAU, 4.0), (ProfileFamily.PLATEAU, -4.0)]:
            H = reference_hamiltonian(GEOM, family, s=s, c=1.0)
            rng = np.random.default_rng(1)
            states = np.column_stack([
                rng.uniform(-0.99, 0.99, 200), rng.uniform(0, 1, 200),
                rng.uniform(0, 2, 200), rng.uniform(0, 1, 200)])
            field = H.vector_field(states)
            assert np.all(field[:, 0::2] == 0.0)

    @pytest.mark.parametrize("family,s,c,n,u", [
        (ProfileFamily.BUMP, 1.0, 1.0, 1, 0.0),
        (ProfileFamily.BUMP, -1.0, 1.0, 1, 0.0),
        (ProfileFamily.PLATEAU, 1.0, 1.0, 2, 0.0),
        (ProfileFamily.PLATEAU, -1.0, 1.0, 2, 0.3),
    ])
    def test_field_matches_finite_differences(self, family, s, c, n, u):
        # central differences at step 1e-5; the gentle members keep the
        # truncation error f'''*h^2/6 below the 1e-6 comparison gate
        geom = PhaseSpaceConfig(R=1.0, u=u, n=n)
        H = reference_hamiltonian(geom, family, s=s, c=c)
        rng = np.random.default_rng(31)
        d = geom.dim
        states = np.zeros((1000, d))
        states[:, 0] = rng.uniform(-0.99, 0.99, 1000)
        states[:, 2::2] = rng.uniform(0, 2, (1000, n))
        states[:, 1::2] = rng.uniform(0, 1, (1000, n + 1))
        field = H.vector_field(states)
        h = 1e-5
        for col in range(d):
            hi = states.copy()
            lo = states.copy()
            hi[:, col] += h
            lo[:, col] -= h
            dH = (H.value(hi) - H.value(lo)) / (2 * h)
            if col % 2 == 0:
                err = np.max(np.abs(field[:, col + 1] - dH))
            else:
                err = np.max(np.abs(field[:, col - 1] + dH))
            assert err <= 1e-6

    def test_steep_member_fd_within_truncation(self):
        # the s=-4 bands carry |f'''| ~ 1e6, so the FD oracle itself is only
        # accurate to ~1e-5 at step 1e-5
        H = reference_hamiltonian(GEOM, ProfileFamily.PLATEAU, s=-4.0, c=2.0)
        rng = np.random.default_rng(7)
        states = np.zeros((2000, 4))
        states[:, 0] = rng.uniform(-0.99, 0.99, 2000)
        states[:, 2] = rng.uniform(0, 2, 2000)
        field = H.vector_field(states)
        h = 1e-5
        hi = states.copy()
        lo = states.copy()
        hi[:, 0] += h
        lo[:, 0] -= h
        dH = (H.value(hi) - H.value(lo)) / (2 * h)
        assert np.max(np.abs(field[:, 1] - dH)) <= 5e-5


class TestMarkedSet:
    def test_deep_plateau_infimum_exceeds_level(self):
        H = reference_hamiltonian(GEOM, ProfileFamily.PLATEAU, s=-2.0, c=1.0)
        assert inf_over_marked_set(H) > 1.0
        assert inf_over_marked_set(H) == pytest.approx(H.form.profile.value(0.0))

    def test_sharpness_marked_value(self):
        prof = build_sharpness_profile(GEOM, 1, float("-inf"), 0.1)
        H = outer_radial(GEOM, prof, scale=1.0)
        assert inf_over_marked_set(H) == pytest.approx(0.9)

    def test_zero_hamiltonian(self):
        prof = profile_from_function(lambda r: 0.0, lambda r: 0.0,
                                     np.linspace(-1, 1, 3))
        H = outer_radial(GEOM, prof, scale=1.0)
        assert inf_over_marked_set(H) == 0.0

    def test_q_dependent_grid_minimum(self):
        p0n = np.linspace(-0.8, 0.8, 9)
        vals = np.outer(np.cos(np.pi * p0n / 1.6) ** 2, np.ones(8))
        H = sampled_grid(GEOM, p0n, vals,
                         modes=[CosineMode(0.25, (1, 0), 0.0, vals)])
        base = sampled_grid(GEOM, p0n, vals).marked_infimum()
        assert H.marked_infimum() == pytest.approx(base - 0.25 * base, abs=1e-6)


class TestSupport:
    def test_reference_families_vanish_near_boundary(self):
        for family, s in [(ProfileFamily.BUMP, 2.0), (ProfileFamily.BUMP, -2.0),
                          (ProfileFamily.PLATEAU, -4.0)]:
            H = reference_hamiltonian(GEOM, family, s=s, c=1.0)
            assert H.support_report()["vanishes"]

    def test_seam_mismatch_rejected(self):
        prof = build_profile(ProfileFamilySpec(ProfileFamily.PLATEAU, -2.0, 1.0))
        with pytest.raises(ValueError):
            three_chart(GEOM, prof, middle_level=-1.0)


class TestSampledGrid:
    def test_interpolation_reproduces_nodes(self):
        p0n = np.linspace(-0.8, 0.8, 5)
        vals = np.arange(5 * 4, dtype=float).reshape(5, 4)
        H = sampled_grid(GEOM, p0n, vals)
        for i, p0 in enumerate(p0n):
            for j in range(4):
                state = np.array([p0, 0.0, 2.0 * j / 4, 0.0])
                assert H.value(state) == pytest.approx(vals[i, j])

    def test_outside_grid_is_zero(self):
        p0n = np.linspace(-0.5, 0.5, 5)
        H = sampled_grid(GEOM, p0n, np.ones((5, 4)))
        assert H.value(np.array([0.9, 0.0, 0.0, 0.0])) == 0.0

    def test_json_round_trip(self):
        p0n = np.linspace(-0.8, 0.8, 9)
        vals = np.outer(np.cos(np.pi * p0n / 1.6) ** 2, np.ones(8))
        H = sampled_grid(GEOM, p0n, vals,
                         modes=[CosineMode(0.05, (1, 0), 0.3, vals)])
        back = ProductHamiltonian.from_json(H.to_json())
        rng = np.random.default_rng(4)
        states = np.column_stack([rng.uniform(-0.7, 0.7, 50),
                                  rng.uniform(0, 1, 50),
                                  rng.uniform(0, 2, 50),
                                  rng.uniform(0, 1, 50)])
        assert np.allclose(back.value(states), H.value(states), atol=1e-14)

    def test_radial_json_round_trip(self):
        H = reference_hamiltonian(GEOM, ProfileFamily.PLATEAU, s=-2.0, c=1.0)
        back = ProductHamiltonian.from_json(H.to_json())
        state = np.array([0.05, 0.3, 0.1, 0.8])
        assert back.value(state) == H.value(state)
        assert back.form.middle_level == -2.0


class TestTimePeriodic:
    def test_blend_is_one_periodic_partition(self):
        H1 = reference_hamiltonian(GEOM, ProfileFamily.BUMP, s=2.0, c=1.0)
        H2 = reference_hamiltonian(GEOM, ProfileFamily.BUMP, s=3.0, c=1.0)
        TH = TimePeriodicHamiltonian(snapshots=(H1, H2))
        state = np.array([0.2, 0.1, 0.0, 0.0])
        v0 = TH.value(state, 0.0)
        v1 = TH.value(state, 1.0)
        assert v0 == pytest.approx(v1)
        assert TH.value(state, 0.0) == pytest.approx(H1.value(state))
        assert TH.value(state, 0.5) == pytest.approx(H2.value(state))
        mid = TH.value(state, 0.25)
        lo, hi = sorted([H1.value(state), H2.value(state)])
        assert lo <= mid <= hi
        assert TH.marked_infimum() == min(H1.marked_infimum(),
                                          H2.marked_infimum())
