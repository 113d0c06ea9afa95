import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from biastol.distributions import GenGammaSpec, gengamma_cdf, gengamma_quantile, size_bias
from biastol.errors import DomainError, InsufficientDrawsError
from biastol.pilot import EstimatedCDF
from biastol.quantile_map import (
    QuantileMap,
    analytic_map,
    identity_map,
    knot_grid,
    monte_carlo_map,
    pilot_map,
)
from biastol.sim_harness import observed_sampler, target_sampler

EXP2 = GenGammaSpec(1.0, 2.0)


def _from_forward(p, vf, kind="pilot"):
    vi = np.interp(p, vf, p)
    return QuantileMap(np.asarray(p), np.asarray(vf), vi, kind)


class TestKnotGrid:
    def test_endpoints_and_order(self):
        g = knot_grid()
        assert g[0] == 0.0 and g[-1] == 1.0
        assert np.all(np.diff(g) > 0)

    def test_tail_refinement(self):
        g = knot_grid(101)
        assert np.any(g <= 1e-7) and np.any(g >= 1 - 1e-7)

    def test_too_small(self):
        with pytest.raises(DomainError):
            knot_grid(1)


class TestIdentity:
    def test_eval(self):
        m = identity_map()
        assert m.forward(0.37) == 0.37
        assert m.inverse(0.9) == 0.9

    @given(st.floats(0, 1))
    def test_exact_everywhere(self, z):
        assert identity_map().forward(z) == pytest.approx(z, abs=1e-15)

    def test_composition_is_neutral(self, exp2_map):
        ident = identity_map()
        p = exp2_map.knots_p
        np.testing.assert_allclose(exp2_map.inverse(ident.inverse(p)), exp2_map.v_inverse, atol=1e-15)


class TestAnalytic:
    def test_median_oracle(self, exp2_map):
        lo, hi = 0.0, 20.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if (1 + mid) * math.exp(-mid) > 0.5 else (lo, mid)
        want = 1 - math.exp(-lo)
        assert exp2_map.inverse(0.5) == pytest.approx(want, abs=1e-10)
        assert str(want).startswith("0.8133")

    def test_knot_values(self):
        m = analytic_map(GenGammaSpec(2.0, 2.0), 1.0, 201)
        biased = size_bias(GenGammaSpec(2.0, 2.0), 1.0)
        for p, v in zip(m.knots_p[1:-1:17], m.v_inverse[1:-1:17]):
            assert v == pytest.approx(gengamma_cdf(gengamma_quantile(p, biased), GenGammaSpec(2.0, 2.0)), abs=1e-10)

    def test_endpoints(self, exp2_map):
        assert exp2_map.inverse(0.0) == 0.0
        assert exp2_map.inverse(1.0) == 1.0

    def test_dominance(self, exp2_map):
        assert np.all(exp2_map.v_inverse >= exp2_map.knots_p - 1e-12)
        assert np.all(exp2_map.v_forward <= exp2_map.knots_p + 1e-12)

    def test_round_trip(self, exp2_map):
        z = np.linspace(0, 1, 5001)
        spacing = float(np.diff(exp2_map.knots_p).max())
        assert np.max(np.abs(exp2_map.forward(exp2_map.inverse(z)) - z)) <= spacing


class TestMonteCarlo:
    def test_same_law_is_near_identity(self):
        draws = 100_000
        m = monte_carlo_map(target_sampler(EXP2), target_sampler(EXP2), draws=draws, seed=17)
        # two independent one-sample DKW bands at confidence 1 - 1e-3
        band = 2 * math.sqrt(math.log(2 / 1e-3) / (2 * draws))
        assert np.max(np.abs(m.v_inverse - m.knots_p)) < band
        assert np.max(np.abs(m.v_forward - m.knots_p)) < band

    def test_matches_analytic(self, exp2_map):
        m = monte_carlo_map(target_sampler(EXP2), observed_sampler(EXP2, None), draws=1_000_000, seed=4)
        assert np.max(np.abs(m.v_inverse - exp2_map.v_inverse)) < 0.005
        assert np.max(np.abs(m.v_forward - exp2_map.v_forward)) < 0.005

    def test_pinned_and_deterministic(self):
        a = monte_carlo_map(target_sampler(EXP2), observed_sampler(EXP2, None), draws=20_000, knot_count=101, seed=8)
        b = monte_carlo_map(target_sampler(EXP2), observed_sampler(EXP2, None), draws=20_000, knot_count=101, seed=8)
        assert a.v_inverse[0] == 0.0 and a.v_inverse[-1] == 1.0
        assert a.to_json() == b.to_json()

    def test_insufficient_draws(self):
        with pytest.raises(InsufficientDrawsError):
            monte_carlo_map(target_sampler(EXP2), target_sampler(EXP2), draws=5000, knot_count=1001, seed=1)

    def test_seed_required(self):
        with pytest.raises(TypeError):
            monte_carlo_map(target_sampler(EXP2), target_sampler(EXP2), draws=20_000, knot_count=101)


class TestPilotMap:
    def test_two_point(self):
        ghat = EstimatedCDF(np.array([1.0, 2.0]), np.array([0.5, 1.0]))
        fhat = EstimatedCDF(np.array([1.0, 2.0]), np.array([0.8, 1.0]), "npmle")
        m = pilot_map(fhat, ghat, 101)
        assert m.inverse(0.5) == pytest.approx(0.8, abs=1e-12)
        assert m.inverse(0.0) == 0.0 and m.inverse(1.0) == 1.0

    def test_same_estimate_is_identity(self):
        e = EstimatedCDF(np.array([0.5, 1.0, 3.0, 4.0]), np.array([0.1, 0.4, 0.9, 1.0]))
        m = pilot_map(e, e, 201)
        np.testing.assert_allclose(m.v_inverse, m.knots_p, atol=1e-12)

    def test_degenerate(self):
        one = EstimatedCDF(np.array([1.0]), np.array([1.0]))
        with pytest.raises(DomainError):
            pilot_map(one, one)


class TestEvaluation:
    def test_exact_at_knots(self, exp2_map):
        i = 417
        assert exp2_map.inverse(exp2_map.knots_p[i]) == exp2_map.v_inverse[i]

    def test_linear_between_knots(self):
        m = _from_forward([0.0, 0.2, 0.4, 1.0], [0.0, 0.1, 0.3, 1.0])
        assert m.forward(0.3) == pytest.approx(0.2, abs=1e-15)

    @pytest.mark.parametrize("z", [-0.01, 1.01, float("nan")])
    def test_domain(self, exp2_map, z):
        with pytest.raises(DomainError):
            exp2_map.forward(z)

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_monotone(self, z1, z2):
        m = analytic_map(GenGammaSpec(0.5, 2.0), 1.0, 101)
        lo, hi = sorted((z1, z2))
        assert m.forward(lo) <= m.forward(hi)
        assert m.inverse(lo) <= m.inverse(hi)

    @given(st.lists(st.floats(0.01, 10), min_size=3, max_size=40, unique=True))
    def test_random_valid_construction(self, increments):
        cum = np.cumsum(increments)
        p = np.concatenate([[0.0], np.sort(np.random.default_rng(0).uniform(0, 1, len(cum) - 1)), [1.0]])
        p = np.unique(p)
        vf = np.concatenate([[0.0], cum / cum[-1]])[: p.size]
        vf[-1] = 1.0
        m = _from_forward(p, np.maximum.accumulate(vf))
        assert m.round_trip_error() <= m.mesh_tolerance()


class TestValidation:
    def test_rejects_bad_endpoints(self):
        with pytest.raises(DomainError):
            QuantileMap(np.array([0.0, 1.0]), np.array([0.1, 1.0]), np.array([0.0, 1.0]), "pilot")

    def test_rejects_decreasing(self):
        p = np.array([0.0, 0.5, 1.0])
        with pytest.raises(DomainError):
            QuantileMap(p, np.array([0.0, 0.6, 1.0]), np.array([0.0, 0.7, 0.3]), "pilot")

    def test_rejects_inconsistent_pair(self):
        p = np.linspace(0, 1, 11)
        with pytest.raises(DomainError):
            QuantileMap(p, p, p**4, "analytic")

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            QuantileMap(np.array([0.0, 1.0]), np.array([0.0, 1.0]), np.array([0.0, 1.0]), "spline")


class TestSerialization:
    def test_round_trip_bitwise(self, exp2_map, tmp_path):
        path = tmp_path / "m.json"
        exp2_map.save(path)
        back = QuantileMap.load(path)
        assert np.array_equal(back.v_inverse, exp2_map.v_inverse)
        assert np.array_equal(back.v_forward, exp2_map.v_forward)
        assert back.to_json() == exp2_map.to_json()

    def test_fields(self, exp2_map):
        doc = json.loads(exp2_map.to_json())
        assert set(doc) == {"kind", "knots_p", "knots_v_forward", "knots_v_inverse", "meta"}
        assert doc["kind"] == "analytic"

    def test_missing_field(self):
        with pytest.raises(DomainError):
            QuantileMap.from_json('{"kind": "identity", "knots_p": [0, 1]}')
