import math

import mpmath as mp
import numpy as np
import pytest

from ballscatter import specfun
from ballscatter.errors import DomainError, PoleError
from ballscatter.modal import (
    ScatteringConfig,
    coefficient_arrays,
    coefficients,
    gk_pair,
    reflection,
    reflection_2d_equivalence,
    transmission,
)
from ballscatter.resonance import find_quasi_resonances


def _c(re, im):
    return complex(float(mp.mpf(re)), float(mp.mpf(im)))


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(lam=0, omega_eps=1), dict(lam=1, omega_eps=-1), dict(lam=1, omega_eps=1, eps=math.nan)])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            ScatteringConfig(**kw)

    def test_from_physical(self):
        cfg = ScatteringConfig.from_physical(q=4.0, q0=1.0, omega=3.0, eps=0.1)
        assert cfg.lam == 2.0
        assert cfg.omega_eps == pytest.approx(0.3)


class TestCoefficients:
    @pytest.mark.parametrize("n", [0, 3, 40])
    @pytest.mark.parametrize("w", [0.01, 1.7, 80.0])
    def test_identity_medium(self, n, w):
        c = coefficients(ScatteringConfig(1.0, w), n)
        assert abs(c.r) <= 1e-13
        assert c.t == 1

    @pytest.mark.parametrize("n", [0, 3, 12])
    @pytest.mark.parametrize("w", [0.2, 2.0, 9.0])
    def test_near_identity_medium(self, n, w):
        c = coefficients(ScatteringConfig(1.0 + 1e-9, w), n)
        assert abs(c.r) < 1e-7

    def test_oracle_table(self, oracle_coeffs):
        for row in oracle_coeffs:
            c = coefficients(ScatteringConfig(row["lambda"], row["omega_eps"]), row["n"])
            r = _c(row["re_r"], row["im_r"])
            t = _c(row["re_t"], row["im_t"])
            assert abs(c.r - r) <= 1e-12 * max(abs(r), 1e-300)
            assert abs(c.t - t) <= 1e-12 * abs(t)

    @pytest.mark.parametrize("lam,w,n", [(2.0, 0.3, 0), (0.5, 1.1, 3), (10.0, 4.0, 7), (50.0, 0.7, 2), (0.1, 30.0, 25)])
    def test_matching_equations(self, lam, w, n):
        c = coefficients(ScatteringConfig(lam, w), n)
        a = specfun.spherical_bessel(n, w)
        b = specfun.spherical_bessel(n, lam * w)
        lhs = c.t * b.j
        rhs = a.j + c.r * a.h
        assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), abs(a.j))
        lhs = lam * c.t * b.jp
        rhs = a.jp + c.r * a.hp
        assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), abs(a.jp))

    def test_unitarity_random(self):
        rng = np.random.default_rng(5)
        lam = 10 ** rng.uniform(-1.5, 2, 2000)
        w = 10 ** rng.uniform(-2, 1.5, 2000)
        n = rng.integers(0, 60, 2000)
        for li, wi, ni in zip(lam, w, n):
            r = reflection(ScatteringConfig(float(li), float(wi)), int(ni))
            assert abs(abs(1 + 2 * r) - 1) <= 1e-10
            assert abs(r) <= 1 + 1e-12

    def test_vectorised_agrees(self):
        w = np.geomspace(0.05, 20, 40)
        r, t = coefficient_arrays(4, 3.0, w)
        for i, wi in enumerate(w):
            c = coefficients(ScatteringConfig(3.0, float(wi)), 4)
            assert r[i] == pytest.approx(c.r, rel=1e-12, abs=1e-300)
            assert t[i] == pytest.approx(c.t, rel=1e-12)

    def test_quasi_resonance_modulus(self):
        roots = find_quasi_resonances(1.5, 10.0, x_max=5.0)
        x1 = roots[0].root
        assert abs(abs(reflection(ScatteringConfig(10.0, x1), 1)) - 1) <= 1e-8

    def test_small_frequency_decay(self):
        for lam in (0.3, 2.0, 5.0):
            for n in (0, 2, 10):
                nu = n + 0.5
                for w in np.linspace(0.01, 0.99 * nu / max(lam, 1), 25):
                    c = coefficients(ScatteringConfig(lam, float(w)), n)
                    a = specfun.spherical_bessel(n, float(w))
                    bound = 2 ** (4 / 3) * abs(lam - 1) * w / (2 * nu) ** (1 / 3) * a.j
                    assert abs(c.r * a.h) <= bound * (1 + 1e-12)

    def test_transmission_finite_and_nonzero(self):
        for n in range(0, 20):
            t = transmission(ScatteringConfig(7.0, 1.3), n)
            assert np.isfinite(t) and t != 0


class TestGK:
    def test_half_order_closed_forms(self):
        x = math.pi / 4
        p = gk_pair(0.5, x)
        assert p.g == pytest.approx(math.pi / 2 - 1, rel=1e-12)
        assert p.k == pytest.approx(1 + math.pi / 2, rel=1e-12)

    @pytest.mark.parametrize("x", [0.1, 0.7, 1.2, 2.0, 4.0])
    def test_half_order_closed_forms_grid(self, x):
        p = gk_pair(0.5, x)
        assert p.g == pytest.approx(2 * x / math.tan(x) - 1, rel=1e-12, abs=1e-13)
        assert p.k == pytest.approx(1 + 2 * x * math.tan(x), rel=1e-12, abs=1e-13)

    def test_derivative_recurrence_oracle(self):
        nu, x = 3.5, 2.0
        p = gk_pair(nu, x)
        with mp.workdps(40):
            # J'_nu = J_{nu-1} - (nu/x) J_nu
            jt = mp.besselj(nu, x)
            djt = mp.besselj(nu - 1, x) - nu / x * jt
            yt = mp.bessely(nu, x)
            dyt = mp.bessely(nu - 1, x) - nu / x * yt
            g = x / nu * djt / jt
            k = -x / nu * dyt / yt
        assert p.g == pytest.approx(float(g), rel=1e-13)
        assert p.k == pytest.approx(float(k), rel=1e-13)
        assert p.theta_tan == pytest.approx(float(yt / jt), rel=1e-13)

    def test_positive_below_order(self):
        for nu in (1.5, 5.5, 30.5):
            for x in np.linspace(0.05, nu * 0.999, 30):
                p = gk_pair(nu, float(x))
                assert p.g > 0 and p.k > 0

    def test_pole(self):
        z = specfun.bessel_zero("J", 2.5, 1)
        with pytest.raises(PoleError) as info:
            gk_pair(2.5, z)
        assert info.value.zero == pytest.approx(z, rel=1e-12)


class TestTwoDimensional:
    @pytest.mark.parametrize("lam,w,n", [(2.0, 0.3, 0), (0.5, 1.1, 3)])
    def test_examples(self, lam, w, n):
        assert reflection_2d_equivalence(ScatteringConfig(lam, w), n) < 1e-10

    def test_near_resonance(self):
        b = find_quasi_resonances(1.5, 10.0, x_max=1.0)[0]
        for w in (b.root * (1 + 1e-6), b.root * (1 - 1e-6), 0.5 * (b.lo + b.hi)):
            assert reflection_2d_equivalence(ScatteringConfig(10.0, w), 1) < 1e-8

    def test_pole_propagates(self):
        z = specfun.bessel_zero("J", 1.5, 1)
        with pytest.raises(PoleError):
            reflection_2d_equivalence(ScatteringConfig(2.0, z), 1)
