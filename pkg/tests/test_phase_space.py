import json

import numpy as np
import pytest

from hamcap.errors import AmbiguousLiftError, WrongClassError
from hamcap.phase_space import (HomotopyClass, LoopSample, PhasePoint,
                                PhaseSpaceConfig, as_class, lift_loop,
                                loop_from_json, loop_to_json, winding_numbers,
                                wrap_state)


def make_loop(K, n, q0_fn, p_fns=None, q_fns=None, p0_fn=None):
    ts = np.arange(K) / K
    pts = []
    for t in ts:
        p = tuple((p_fns[i](t) if p_fns else 0.0) for i in range(n))
        q = tuple((q_fns[i](t) if q_fns else 0.0) for i in range(n))
        pts.append(PhasePoint(p0=p0_fn(t) if p0_fn else 0.0, q0=q0_fn(t),
                              p=p, q=q))
    return pts


class TestGeometry:
    def test_derived_quantities(self):
        geo = PhaseSpaceConfig(R=2.0, u=0.5, n=3)
        assert geo.m_u == 1.0
        assert list(geo.center) == [0.5, 0.0, 0.0, 0.0]
        geo2 = PhaseSpaceConfig(R=1.0, u=0.4, n=1)
        assert geo2.m_u == pytest.approx(0.6)
        assert 0 < geo2.m_u <= 1

    @pytest.mark.parametrize("R,u,n", [(-1.0, 0.0, 1), (1.0, 1.0, 1),
                                       (1.0, -1.5, 1), (1.0, 0.0, 0)])
    def test_invalid_geometry(self, R, u, n):
        with pytest.raises(ValueError):
            PhaseSpaceConfig(R=R, u=u, n=n)

    def test_torus_winding_must_vanish(self):
        with pytest.raises(ValueError):
            HomotopyClass(ell=1, torus_winding=(1, 0))


class TestWindingNumbers:
    def test_constant_loop(self):
        pts = make_loop(32, 2, q0_fn=lambda t: 0.37)
        assert list(winding_numbers(pts)) == [0, 0, 0, 0, 0]

    def test_double_winding(self):
        pts = make_loop(64, 1, q0_fn=lambda t: (2 * t) % 1.0)
        assert list(winding_numbers(pts)) == [2, 0, 0]

    def test_mixed_winding(self):
        # q0 winds once (period 1), p1 = 2t winds once (period 2)
        pts = make_loop(64, 1, q0_fn=lambda t: t,
                        p_fns=[lambda t: (2 * t) % 2.0])
        assert list(winding_numbers(pts)) == [1, 1, 0]

    def test_cyclic_rotation_invariance(self):
        rng = np.random.default_rng(11)
        pts = make_loop(48, 1, q0_fn=lambda t: (3 * t) % 1.0,
                        q_fns=[lambda t: (0.3 + 0.1 * np.sin(2 * np.pi * t)) % 1.0])
        w0 = winding_numbers(pts)
        for shift in rng.integers(1, 48, size=5):
            rotated = pts[int(shift):] + pts[:int(shift)]
            assert np.array_equal(winding_numbers(rotated), w0)

    def test_reversal_negates(self):
        pts = make_loop(48, 1, q0_fn=lambda t: (2 * t) % 1.0,
                        p_fns=[lambda t: (2 * t) % 2.0])
        w = winding_numbers(pts)
        w_rev = winding_numbers(pts[::-1])
        assert np.array_equal(w_rev, -w)

    def test_ambiguous_lift(self):
        # successive q0 jumps of exactly half a period
        pts = make_loop(8, 1, q0_fn=lambda t: (4 * t) % 1.0)
        with pytest.raises(AmbiguousLiftError):
            winding_numbers(pts)


class TestLiftLoop:
    def test_lift_endpoint_difference(self):
        pts = make_loop(128, 1, q0_fn=lambda t: t % 1.0)
        lift = lift_loop(pts, as_class(1, 1))
        assert lift.states[-1, 1] - lift.states[0, 1] == pytest.approx(1.0)
        assert lift.states.shape == (129, 4)
        assert lift.times[0] == 0.0 and lift.times[-1] == 1.0

    def test_constant_loop_identity(self):
        pts = make_loop(16, 2, q0_fn=lambda t: 0.25)
        lift = lift_loop(pts, as_class(0, 2))
        raw = np.stack([p.to_state() for p in pts])
        assert np.array_equal(lift.states[:-1], raw)
        assert np.array_equal(lift.states[-1], raw[0])

    def test_wrong_class(self):
        pts = make_loop(64, 1, q0_fn=lambda t: t % 1.0)
        with pytest.raises(WrongClassError):
            lift_loop(pts, as_class(2, 1))

    def test_round_trip_wrapping(self):
        # dyadic sample values survive the lift/wrap round trip exactly
        pts = make_loop(64, 1, q0_fn=lambda t: (3 * t) % 1.0,
                        p_fns=[lambda t: (2 * t) % 2.0])
        with pytest.raises(WrongClassError):
            lift_loop(pts, as_class(3, 1))  # torus winding forbidden
        pts = make_loop(64, 1, q0_fn=lambda t: (3 * t) % 1.0)
        lift = lift_loop(pts, as_class(3, 1))
        wrapped = lift.wrapped()
        raw = np.stack([p.to_state() for p in pts])
        assert np.max(np.abs(wrapped[:-1] - raw)) == 0.0

    def test_random_loops_round_trip(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            ell = int(rng.integers(-3, 4))
            K = 96
            ts = np.arange(K) / K
            wobble = 0.1 * np.sin(2 * np.pi * ts + rng.uniform(0, 1))
            pts = [PhasePoint(p0=float(rng.uniform(-0.5, 0.5)),
                              q0=float((ell * t + w) % 1.0),
                              p=(float((0.5 + w) % 2.0),),
                              q=(float((0.2 - w) % 1.0),))
                   for t, w in zip(ts, wobble)]
            lift = lift_loop(pts, as_class(ell, 1))
            raw = np.stack([p.to_state() for p in pts])
            assert np.max(np.abs(lift.wrapped()[:-1] - raw)) < 1e-12


class TestSerialization:
    def test_raw_loop_json_round_trip(self):
        pts = make_loop(16, 1, q0_fn=lambda t: t % 1.0)
        text = loop_to_json(pts)
        back = loop_from_json(text)
        assert all(isinstance(p, PhasePoint) for p in back)
        assert np.allclose(np.stack([p.to_state() for p in back]),
                           np.stack([p.to_state() for p in pts]))

    def test_lifted_loop_json_round_trip(self):
        pts = make_loop(32, 1, q0_fn=lambda t: (2 * t) % 1.0)
        lift = lift_loop(pts, as_class(2, 1))
        text = loop_to_json(lift)
        rec = json.loads(text)
        assert all(r["lifted"] for r in rec)
        back = loop_from_json(text)
        assert isinstance(back, LoopSample)
        assert back.homotopy_class.ell == 2
        assert np.allclose(back.states, lift.states)


def test_wrap_state_canonicalizes():
    z = np.array([0.3, 1.25, 2.5, -0.25])
    w = wrap_state(z, 1)
    assert w[0] == 0.3
    assert w[1] == pytest.approx(0.25)
    assert w[2] == pytest.approx(0.5)
    assert w[3] == pytest.approx(0.75)
