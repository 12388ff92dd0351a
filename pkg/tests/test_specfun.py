import math

import mpmath as mp
import numpy as np
import pytest

from ballscatter import specfun
from ballscatter.errors import BesselOverflow, DomainError
from oracle import spherical_jy


def rel(a, b):
    return abs(a - b) / abs(b)


class TestOrder:
    def test_nu_is_half_integer(self):
        o = specfun.Order(7)
        assert o.nu - o.n == 0.5

    def test_from_nu_round_trip(self):
        assert specfun.Order.from_nu(5.5).n == 5

    @pytest.mark.parametrize("bad", [-1, 2.5])
    def test_rejects_invalid(self, bad):
        with pytest.raises(DomainError):
            specfun.Order(bad)

    def test_from_nu_rejects_integer(self):
        with pytest.raises(DomainError):
            specfun.Order.from_nu(3.0)


class TestSphericalBessel:
    def test_j0_at_pi_vanishes(self):
        assert abs(specfun.spherical_bessel(0, math.pi).j) < 1e-16

    def test_j0_at_half(self):
        assert specfun.spherical_bessel(0, 0.5).j == pytest.approx(math.sin(0.5) / 0.5, rel=1e-15)

    def test_series_oracle_n5(self):
        e = specfun.spherical_bessel(5, 2.7)
        j, jp, y, yp = spherical_jy(5, 2.7)
        assert rel(e.j, j) < 1e-13
        assert rel(e.jp, jp) < 1e-13
        assert rel(e.y, y) < 1e-13
        assert rel(e.yp, yp) < 1e-13

    @pytest.mark.parametrize("x", [0.0, -1.0])
    def test_nonpositive_argument(self, x):
        with pytest.raises(DomainError):
            specfun.spherical_bessel(3, x)

    def test_graded_overflow(self):
        e = specfun.spherical_bessel(200, 1e-3)
        with pytest.raises(BesselOverflow) as info:
            _ = e.y
        assert info.value.sign < 0
        ref = mp.log(abs(spherical_jy(200, 1e-3)[2]))
        assert info.value.log_abs == pytest.approx(float(ref), rel=1e-13)
        # ratios stay finite
        assert math.isfinite(e.ratio("yp", "y"))

    def test_wronskian_grid(self):
        for n in (0, 1, 7, 50, 200):
            for x in np.geomspace(1e-3, 1e4, 15):
                assert abs(specfun.spherical_bessel(n, float(x)).wronskian_residual()) <= 1e-11

    def test_x_abs_h_non_increasing(self):
        for n in (0, 3, 20):
            x = np.geomspace(1e-2, 200, 400)
            vals = np.array([xi * math.exp(specfun.spherical_bessel(n, float(xi)).log_abs_h()) for xi in x])
            assert np.all(np.diff(vals) <= 1e-13 * vals[1:])

    def test_vectorised_matches_scalar(self):
        x = np.geomspace(1e-3, 1e3, 50)
        a = specfun.jy_arrays(9, x)
        for i, xi in enumerate(x):
            e = specfun.spherical_bessel(9, float(xi))
            assert math.ldexp(a.j[i], int(a.je[i])) == pytest.approx(e.j, rel=1e-12, abs=1e-300)


class TestCylinder:
    def test_half_order_closed_form(self):
        c = specfun.cylinder_bessel(0.5, 0.5)
        assert c.j == pytest.approx(math.sqrt(2 / (math.pi * 0.5)) * math.sin(0.5), rel=1e-15)

    @pytest.mark.parametrize("x", [0.1, 1.0, 7.5, 100.0])
    def test_half_order_hankel_modulus(self, x):
        c = specfun.cylinder_bessel(0.5, x)
        assert math.hypot(c.j, c.y) == pytest.approx(math.sqrt(2 / (math.pi * x)), rel=1e-14)

    def test_hankel_over_j_at_matching_argument(self):
        c = specfun.cylinder_bessel(10.5, 10.5)
        assert math.sqrt(1 + (c.y / c.j) ** 2) < 2.01

    def test_hankel_over_j_below_matching_argument(self):
        # one half below the order the ratio is much larger than 2.01
        c = specfun.cylinder_bessel(10.5, 10.0)
        with mp.workdps(30):
            ref = mp.sqrt(1 + (mp.bessely(10.5, 10) / mp.besselj(10.5, 10)) ** 2)
        assert math.sqrt(1 + (c.y / c.j) ** 2) == pytest.approx(float(ref), rel=1e-13)

    @pytest.mark.parametrize("n,x", [(0, 0.3), (4, 2.2), (30, 12.0), (120, 400.0)])
    def test_consistent_with_spherical(self, n, x):
        c = specfun.cylinder_bessel(n + 0.5, x)
        s = specfun.spherical_bessel(n, x)
        assert c.j == pytest.approx(math.sqrt(2 * x / math.pi) * s.j, rel=1e-14)

    def test_against_mpmath(self):
        for nu, x in [(2.5, 1.3), (20.5, 25.0), (60.5, 10.0)]:
            c = specfun.cylinder_bessel(nu, x)
            with mp.workdps(30):
                assert rel(c.j, float(mp.besselj(nu, x))) < 1e-13

    def test_sqrt_h_monotone_beyond_nu(self):
        nu = 8.5
        x = np.linspace(nu + 0.01, 80, 300)
        vals = []
        for xi in x:
            c = specfun.cylinder_bessel(nu, float(xi))
            vals.append(math.sqrt(xi * xi - nu * nu) * (c.j**2 + c.y**2))
        vals = np.array(vals)
        assert np.all(np.diff(vals) >= -1e-13)
        assert np.all(vals < 2 / math.pi)


class TestZeros:
    @pytest.mark.parametrize("k", [1, 2, 5, 40])
    def test_half_order_j_zeros(self, k):
        assert specfun.bessel_zero("J", 0.5, k) == pytest.approx(k * math.pi, rel=1e-14)

    def test_half_order_y_zero(self):
        assert specfun.bessel_zero("Y", 0.5, 1) == pytest.approx(math.pi / 2, rel=1e-14)

    def test_half_order_jprime_zero(self):
        z = specfun.bessel_zero("Jprime", 0.5, 1)
        assert 1 < z < math.pi / 2
        assert math.tan(z) == pytest.approx(2 * z, rel=1e-11)

    def test_y_higher_index_unsupported(self):
        with pytest.raises(DomainError):
            specfun.bessel_zero("Y", 2.5, 2)

    def test_residuals_against_mpmath(self):
        with mp.workdps(30):
            for nu in (1.5, 10.5, 77.5):
                for k in (1, 3):
                    z = specfun.bessel_zero("J", nu, k)
                    assert rel(z, float(mp.besseljzero(nu, k))) < 1e-13
                    zp = specfun.bessel_zero("Jprime", nu, k)
                    assert rel(zp, float(mp.besseljzero(nu, k, derivative=1))) < 1e-13
                assert rel(specfun.bessel_zero("Y", nu, 1), float(mp.besselyzero(nu, 1))) < 1e-13

    def test_zero_table_interlacing(self):
        for n in (0, 1, 10, 100, 200):
            nu = n + 0.5
            t = specfun.zero_table(nu, 4)
            for k in range(4):
                assert t.alpha1[k] < t.alpha[k]
                if k + 1 < 4:
                    assert t.alpha[k] < t.alpha1[k + 1]
            assert nu < t.alpha1[0]
            assert t.alpha1[0] > nu + 0.8 * nu ** (1 / 3)
            assert t.beta1 <= t.alpha[0]
            if n >= 1:
                assert t.gamma1 > nu

    def test_first_zero_enclosure(self):
        a1 = specfun.A1
        for n in (0, 1, 2, 10, 50, 200):
            nu = n + 0.5
            c = (specfun.bessel_zero("J", nu, 1) - nu) / nu ** (1 / 3)
            assert a1 < c < a1 + 0.3 * a1 * a1 * nu ** (-2 / 3)


class TestBounds:
    def test_sup_j0_is_one(self):
        assert specfun.sup_spherical_j(0) == 1.0

    def test_sup_j3_grid(self):
        a = specfun.bessel_zero("J", 3.5, 1)
        x = np.arange(1e-5, a, 1e-5)
        b = specfun.jy_arrays(3, x)
        grid_max = float(np.max(np.ldexp(b.j, b.je)))
        s = specfun.sup_spherical_j(3)
        assert s >= grid_max
        assert s - grid_max < 1e-10

    def test_sup_enclosure(self):
        for n in range(0, 61):
            s = specfun.sup_spherical_j(n)
            ref = (2 * n + 1) ** (-5 / 6)
            assert s / (2 * math.sin(0.5)) > ref > 0.663 * s

    def test_landau_n10(self):
        nu = 10.5
        val = nu ** (1 / 3) * specfun.sup_cylinder_j(nu)
        assert 0.539 < val < 0.675

    def test_paris_collapses(self):
        x = 0.8
        assert specfun.paris_bound(2, x, x) == pytest.approx(specfun.spherical_bessel(2, x).j, rel=1e-15)

    def test_paris_j1(self):
        j11 = specfun.spherical_bessel(1, 1.0).j
        for x in np.linspace(0.05, 1.0, 20):
            b = specfun.paris_bound(1, float(x), 1.0)
            assert specfun.spherical_bessel(1, float(x)).j <= b
            assert b <= x * math.exp(1 / 7) * j11 * (1 + 1e-15)

    def test_paris_n2(self):
        assert specfun.spherical_bessel(2, 0.5).j <= specfun.paris_bound(2, 0.5, 1.0)

    def test_paris_range(self):
        with pytest.raises(DomainError):
            specfun.paris_bound(1, 1.0, 3.0)


class TestTinyArguments:
    @pytest.mark.parametrize("n", [0, 1, 5, 200])
    @pytest.mark.parametrize("x", [1e-300, 2.0**-101, 2.0**-99])
    def test_log_magnitudes(self, n, x):
        e = specfun.spherical_bessel(n, x)
        with mp.workdps(40):
            c = mp.sqrt(mp.pi / (2 * x))
            lj = float(mp.log(abs(c * mp.besselj(n + 0.5, x))))
            ly = float(mp.log(abs(c * mp.bessely(n + 0.5, x))))
        assert e.log_abs("j") == pytest.approx(lj, rel=1e-14)
        assert e.log_abs("y") == pytest.approx(ly, rel=1e-14)
        assert abs(e.wronskian_residual()) <= 1e-11

    @pytest.mark.parametrize("nu", [0.5, 1.5, 200.5])
    def test_cylinder(self, nu):
        x = 1e-300
        c = specfun.cylinder_bessel(nu, x)
        with mp.workdps(40):
            lj = float(mp.log(mp.besselj(nu, x)))
            ly = float(mp.log(-mp.bessely(nu, x)))
        assert c.log_abs("j") == pytest.approx(lj, rel=1e-14)
        assert c.log_abs("y") == pytest.approx(ly, rel=1e-14)
        assert abs(c.wronskian_residual()) <= 1e-11
