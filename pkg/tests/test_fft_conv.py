import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from biastol.distributions import GenGammaSpec, qbeta
from biastol.errors import DomainError
from biastol.fft_conv import (
    FFTConfig,
    GridDensity,
    convolve,
    difference_law,
    discretize,
    snap_out,
    support_bounds,
)
from biastol.order_stats import OrderStatLaw, hcdf
from biastol.quantile_map import analytic_map

from oracles import direct_convolution, independent_difference_cdf


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(epsilon=0.0), dict(epsilon=1e-3), dict(target_cells=10),
                                    dict(padding="zero")])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            FFTConfig(**kw)

    def test_defaults(self):
        c = FFTConfig()
        assert (c.epsilon, c.target_cells, c.padding) == (1e-6, 4096, "nextpow2")


class TestSupportBounds:
    def test_identity(self, ident):
        eps = 1e-6
        lo, hi = support_bounds(OrderStatLaw(1, 5, ident), eps)
        assert lo == pytest.approx(qbeta(eps / 2, 1, 5), abs=1e-15)
        assert hi == pytest.approx(qbeta(1 - eps / 2, 1, 5), abs=1e-15)

    def test_degenerate_epsilon(self, ident):
        with pytest.raises(DomainError):
            support_bounds(OrderStatLaw(1, 5, ident), 1.0)

    def test_mass(self, exp2_map):
        law = OrderStatLaw(3, 40, exp2_map)
        lo, hi = support_bounds(law, 1e-5)
        assert hcdf(law, hi) - hcdf(law, lo) == pytest.approx(1 - 1e-5, abs=exp2_map.mesh_tolerance())
        assert 0 <= lo < hi <= 1

    @given(st.floats(1e-9, 1e-2), st.floats(1e-9, 1e-2))
    def test_nested(self, e1, e2):
        from biastol.quantile_map import identity_map

        law = OrderStatLaw(4, 30, identity_map())
        small, big = sorted((e1, e2))
        l1, u1 = support_bounds(law, small)
        l2, u2 = support_bounds(law, big)
        assert l1 <= l2 + 1e-15 and u2 <= u1 + 1e-15


class TestSnap:
    @given(st.floats(-1, 1), st.floats(0, 1), st.floats(1e-5, 0.1))
    def test_outward(self, lo, width, step):
        i0, i1 = snap_out(lo, lo + width, step)
        assert i0 * step <= lo + 1e-9 * step
        assert i1 * step >= lo + width - 1e-9 * step
        assert i1 > i0


class TestDiscretize:
    def test_uniform(self, ident):
        step = 1 / 256
        g = discretize(OrderStatLaw(1, 1, ident), False, 0.0, 1.0, step)
        np.testing.assert_allclose(g.masses, step, atol=1e-15)

    def test_telescoping(self, exp2_map):
        law = OrderStatLaw(2, 30, exp2_map)
        lo, hi = support_bounds(law, 1e-6)
        g = discretize(law, False, lo, hi, (hi - lo) / 1000)
        edges = g.edges
        assert g.total == pytest.approx(hcdf(law, edges[-1]) - hcdf(law, edges[0]), abs=1e-12)
        assert g.total >= 1 - 1e-6 - 1e-12

    def test_reflection_involution(self, exp2_map):
        law = OrderStatLaw(5, 60, exp2_map)
        step = 1 / 2048
        lo, hi = 0.0 + 40 * step, 400 * step
        plain = discretize(law, False, lo, hi, step)
        neg = discretize(law, True, lo, hi, step)
        np.testing.assert_allclose(neg.masses, plain.masses[::-1], atol=1e-15)
        back = neg.reflected()
        assert back.origin == pytest.approx(plain.origin, abs=1e-15)
        np.testing.assert_allclose(back.masses, plain.masses, atol=1e-15)

    def test_printed_index_reading_has_no_mass(self, ident):
        """The lower kernel as literally indexed evaluates H_r at -L_r - k*dx <= 0.

        That reading places every cell outside [L_r, U_r], so all masses vanish;
        the reflected construction used by difference_law captures the full law.
        """
        n, r, m, eps = 60, 2, 3, 1e-6
        lower = OrderStatLaw(r, n, ident)
        l_r, u_r = support_bounds(lower, eps)
        dx = (u_r - l_r) / 512
        k = np.arange(600)
        args = -l_r - k * dx
        h = hcdf(lower, np.clip(args, 0.0, 1.0))
        literal = h[1:] - h[:-1]  # H_r(-L_r - (k+1)dx) - H_r(-L_r - k dx)
        assert np.all(args <= 0)
        assert np.abs(literal).sum() == 0.0
        assert discretize(lower, True, l_r, u_r, dx).total >= 1 - eps


class TestConvolve:
    def test_point_mass_shift(self):
        d = GridDensity(0.25, 0.125, np.array([0.2, 0.5, 0.3]))
        delta = GridDensity(0.5, 0.125, np.array([1.0]))
        out = convolve(d, delta, "exact")
        assert out.origin == pytest.approx(0.75)
        np.testing.assert_allclose(out.masses[:3], d.masses, atol=1e-15)

    def test_triangle(self):
        u = GridDensity(0.0, 0.5, np.array([0.5, 0.5]))
        out = convolve(u, u)
        np.testing.assert_allclose(out.masses[:3], [0.25, 0.5, 0.25], atol=1e-15)
        assert out.order == 2

    @pytest.mark.parametrize("seed", range(5))
    def test_random_against_direct(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.random(256)
        b = rng.random(200)
        a, b = a / a.sum(), b / b.sum()
        out = convolve(GridDensity(0.0, 0.01, a), GridDensity(-1.0, 0.01, b))
        np.testing.assert_allclose(out.masses[: a.size + b.size - 1], direct_convolution(a, b), atol=1e-10)

    @given(st.integers(1, 300), st.integers(1, 300), st.integers(0, 2**31))
    def test_padding_modes_agree(self, na, nb, seed):
        rng = np.random.default_rng(seed)
        a = GridDensity(0.0, 0.1, rng.random(na))
        b = GridDensity(0.0, 0.1, rng.random(nb))
        np.testing.assert_allclose(convolve(a, b, "exact").masses, convolve(a, b, "nextpow2").masses, atol=1e-12)

    def test_support(self):
        a = GridDensity(0.3, 0.01, np.full(10, 0.1))
        b = GridDensity(-0.2, 0.01, np.full(5, 0.2))
        out = convolve(a, b)
        assert out.origin == pytest.approx(0.1)
        assert out.masses.size == 15
        assert out.info["fft_size"] == 16

    def test_step_mismatch(self):
        with pytest.raises(DomainError):
            convolve(GridDensity(0, 0.1, [1.0]), GridDensity(0, 0.2, [1.0]))

    def test_empty(self):
        with pytest.raises(DomainError):
            GridDensity(0, 0.1, np.array([]))


class TestGridDensity:
    def test_order2_cdf_is_exact_for_triangle(self):
        # two uniforms on [0, 1): the sum has the triangular law on [0, 2]
        u = GridDensity(0.0, 1.0, np.array([1.0]))
        d = convolve(u, u, "exact")
        assert d.cdf(1.0) == pytest.approx(0.5)
        assert d.quantile(0.5) == pytest.approx(1.0)

    def test_quantile_domain(self):
        with pytest.raises(DomainError):
            GridDensity(0, 1, [1.0]).quantile(1.5)


class TestDifferenceLaw:
    def test_precondition(self, ident):
        with pytest.raises(DomainError):
            difference_law(2, 1, 1, ident)

    @pytest.mark.parametrize("n,r,m", [(22, 1, 1), (60, 3, 7), (147, 10, 12), (473, 1, 1)])
    def test_matches_independent_convolution(self, ident, n, r, m):
        d = difference_law(n, r, m, ident)
        x, cdf = d.cdf_points()
        lo, hi = x[np.searchsorted(cdf, 1e-4)], x[np.searchsorted(cdf, 1 - 1e-4)]
        zs = np.linspace(lo, hi, 25)
        want = np.array([independent_difference_cdf(z, n, r, m) for z in zs])
        assert np.max(np.abs(d.cdf(zs) - want)) < 2e-5

    def test_mass_budget(self, exp2_map):
        d = difference_law(200, 3, 2, exp2_map, FFTConfig(epsilon=1e-6))
        assert d.info["truncated_mass"] <= 2e-6 + 1e-12
        assert d.total >= 1 - 2e-6 - 1e-9

    def test_cdf_shape(self, exp2_map):
        d = difference_law(120, 5, 7, exp2_map)
        x, cdf = d.cdf_points()
        assert np.all(np.diff(cdf) >= 0)
        assert cdf[0] == 0.0 and cdf[-1] == pytest.approx(1.0)
        assert x[0] >= -1 - 1e-9 and x[-1] <= 1 + 1e-9

    @pytest.mark.parametrize("r,m", [(1, 1), (3, 2), (5, 7), (10, 12)])
    def test_refinement(self, exp2_map, r, m):
        from biastol.tolerance_fft import coverage_fft, sample_size_fft
        from biastol.tolerance_classic import ToleranceSpec

        n = sample_size_fft(ToleranceSpec(r, m, 0.8, 0.05), exp2_map).n
        coarse = coverage_fft(n, r, m, 0.05, exp2_map, FFTConfig(target_cells=4096))
        fine = coverage_fft(n, r, m, 0.05, exp2_map, FFTConfig(target_cells=8192))
        step = coverage_fft(n + 1, r, m, 0.05, exp2_map) - coarse
        assert abs(fine - coarse) < step

    def test_cdf_grid_general_map(self):
        m = analytic_map(GenGammaSpec(0.5, 2.0), 1.0)
        d = difference_law(300, 1, 12, m)
        assert 0.0 < d.quantile(0.05) < 1.0
