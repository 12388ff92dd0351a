import math

import numpy as np
import pytest

from ballscatter import specfun
from ballscatter.errors import DivergentSeriesError, DomainError, UnsupportedProfileError
from ballscatter.fields import IncidentField, modal_trace, plane_wave_coeffs
from ballscatter.modal import ScatteringConfig, coefficients
from ballscatter.norms import (
    NormSpec,
    grid_sup_norm,
    h_sigma_norm,
    mode_sups,
    n_pq_seminorm,
    n_sigma_norm,
    pq_weight,
)

Z = (0.0, 0.0, 1.0)
CFG = ScatteringConfig(2.0, 0.3)


class TestHSigma:
    @pytest.mark.parametrize("R", [0.01, 1.0, 7.0, 40.0])
    def test_plane_wave_unit(self, R):
        tr = modal_trace("incident", ScatteringConfig(3.0, 1.0), plane_wave_coeffs(Z), R, n_max=90)
        v = h_sigma_norm(tr, 0.0)
        assert v.value == pytest.approx(1.0, abs=1e-12)
        assert v.lower <= v.value <= v.upper

    def test_single_mode(self):
        inc = IncidentField.modal({(3, -2): 0.4 - 0.3j})
        tr = modal_trace("incident", CFG, inc, 2.0)
        j3 = specfun.spherical_bessel(3, 0.6).j
        assert h_sigma_norm(tr, 0.25).value == pytest.approx(0.5 * j3 * 7**0.25, rel=1e-14)

    def test_scattered_reference(self, oracle_coeffs):
        # direct sum of the modal products at R = 2 eps
        tr = modal_trace("scattered", CFG, plane_wave_coeffs(Z), 2.0)
        terms = []
        for n in range(tr.n_max + 1):
            c = coefficients(CFG, n)
            h = specfun.spherical_bessel(n, 0.6).h
            terms.append((2 * n + 1) ** (1 + 2 / 3) * abs(c.r * h) ** 2)
        assert h_sigma_norm(tr, 1 / 3).value == pytest.approx(math.sqrt(math.fsum(terms)), rel=1e-13)

    def test_monotone_in_sigma(self):
        tr = modal_trace("scattered", ScatteringConfig(5.0, 2.0), plane_wave_coeffs(Z), 1.5)
        vals = [h_sigma_norm(tr, s).value for s in (-1, -1 / 3, 0, 1 / 3, 1)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))


class TestNSigma:
    def test_radial_field_is_sup_norm(self):
        inc = IncidentField.modal({(0, 0): 2.5})
        # j_0 attains its sup 1 at the origin; the scattered radial sup sits at R = eps
        assert n_sigma_norm("incident", CFG, inc, 0.4).value == pytest.approx(2.5, rel=1e-15)
        c = coefficients(CFG, 0)
        h0 = specfun.spherical_bessel(0, 0.3).h
        grid = np.geomspace(1.0, 1e3, 4000)
        sup = max(abs(2.5 * c.r * specfun.spherical_bessel(0, 0.3 * R).h) for R in grid)
        got = n_sigma_norm("scattered", CFG, inc, 0.0).value
        assert got == pytest.approx(abs(2.5 * c.r * h0), rel=1e-14)
        assert got >= sup * (1 - 1e-14)

    def test_plane_wave_sigma_zero_diverges(self):
        with pytest.raises(DivergentSeriesError) as info:
            n_sigma_norm("incident", CFG, plane_wave_coeffs(Z), 0.0)
        partial = np.asarray(info.value.partial_sums)
        assert np.all(np.diff(partial) > 0)

    def test_plane_wave_sigma_third_diverges(self):
        with pytest.raises(DivergentSeriesError):
            n_sigma_norm("incident", CFG, plane_wave_coeffs(Z), 1 / 3)

    def test_truncated_plane_wave_sup_values(self):
        inc = plane_wave_coeffs(Z, 12)
        v = n_sigma_norm("incident", CFG, inc, 1 / 3).value
        ref = math.sqrt(math.fsum((2 * n + 1) ** (2 / 3) * (2 * n + 1) * specfun.sup_spherical_j(n) ** 2 for n in range(13)))
        assert v == pytest.approx(ref, rel=1e-14)

    def test_convergent_plane_wave(self):
        v = n_sigma_norm("incident", CFG, plane_wave_coeffs(Z), -0.5)
        assert v.lower <= v.value <= v.upper
        assert (v.upper - v.lower) / v.value < 1e-2

    def test_h_below_n(self):
        inc = plane_wave_coeffs((0.0, 0.6, 0.8), 15)
        cfg = ScatteringConfig(4.0, 1.2, eps=0.5)
        for kind, R in (("incident", 0.7), ("incident", 3.0), ("scattered", 0.5), ("scattered", 2.0), ("transmitted", 0.3)):
            for s in (0.0, 1 / 3):
                h = h_sigma_norm(modal_trace(kind, cfg, inc, R), s).value
                n = n_sigma_norm(kind, cfg, inc, s).value
                assert h <= n * (1 + 1e-12)

    def test_unsupported(self):
        with pytest.raises(UnsupportedProfileError):
            n_sigma_norm("total", CFG, plane_wave_coeffs(Z, 3), 0.0)

    def test_grid_sup_is_lower(self):
        prof = {(0, 0): lambda R: specfun.spherical_bessel(0, R).j, (2, 1): lambda R: specfun.spherical_bessel(2, R).j}
        g = grid_sup_norm(prof, 0.0, 1e-4, 20.0)
        exact = math.sqrt(1 + specfun.sup_spherical_j(2) ** 2)
        assert g.value <= exact
        assert g.value == pytest.approx(exact, rel=1e-5)


class TestSeminorm:
    def test_equal_to_n_sigma_single_harmonic(self):
        inc = IncidentField.modal({(4, 1): 1.3})
        a = n_pq_seminorm("incident", CFG, inc, 0.2, 0, math.inf, 1.0).value
        b = n_sigma_norm("incident", CFG, inc, 0.2).value
        assert a == pytest.approx(b, rel=1e-15)

    def test_plane_wave_enclosure(self):
        for kappa in (1.0, 1.2):
            for n in range(0, 201):
                c = (2 * n + 1) ** (1 / 3) * math.sqrt(2 * n + 1) * specfun.sup_spherical_j(n)
                assert 1 <= c <= 2 ** (3 / 5)
            val = n_pq_seminorm("incident", CFG, plane_wave_coeffs(Z), 0.0, 0, 60, kappa).value
            lo = max(pq_weight(n, kappa) * (2 * n + 1) ** (-1 / 3) for n in range(61))
            assert lo <= val <= 2 ** (3 / 5) * lo

    def test_brute_force(self):
        inc = plane_wave_coeffs(Z)
        got = n_pq_seminorm("incident", CFG, inc, 0.1, 1, 5, 1.5).value
        ref = max(pq_weight(n, 1.5) * (2 * n + 1) ** 0.1 * math.sqrt(2 * n + 1) * specfun.sup_spherical_j(n) for n in range(1, 6))
        assert got == pytest.approx(ref, rel=1e-15)

    def test_monotone_in_q(self):
        inc = plane_wave_coeffs(Z)
        qs = [n_pq_seminorm("scattered", CFG, inc, 0.0, 0, q, 1.3).value for q in (1, 3, 8)]
        assert qs == sorted(qs)

    def test_monotone_in_kappa_from_first_mode(self):
        inc = plane_wave_coeffs(Z)
        ks = [n_pq_seminorm("scattered", CFG, inc, 0.0, 1, 8, k).value for k in (1.0, 1.3, 2.0)]
        assert ks == sorted(ks)

    def test_zeroth_mode_weight_below_one(self):
        # nu - nu^(5/6) < 0 at nu = 1/2, so kappa > 1 shrinks the n = 0 term
        assert pq_weight(0, 2.0) < 1.0
        assert all(pq_weight(n, 2.0) >= 1.0 for n in range(1, 50))

    def test_below_n_sigma(self):
        inc = plane_wave_coeffs(Z, 20)
        for p in (0, 3):
            a = n_pq_seminorm("scattered", CFG, inc, 1 / 3, p, math.inf, 1.0).value
            assert a <= n_sigma_norm("scattered", CFG, inc, 1 / 3).value

    def test_infinite_q_needs_unit_kappa(self):
        with pytest.raises(DomainError):
            n_pq_seminorm("incident", CFG, plane_wave_coeffs(Z), 0.0, 0, math.inf, 1.1)

    def test_mode_sups_incident(self):
        assert np.allclose(mode_sups("incident", CFG, [0, 1, 2]), [specfun.sup_spherical_j(n) for n in range(3)])


class TestSpec:
    @pytest.mark.parametrize(
        "kw",
        [dict(kind="L2", sigma=0), dict(kind="N_pq_sigma", sigma=0, p=3, q=2), dict(kind="N_pq_sigma", sigma=0, kappa=0.5), dict(kind="H_sigma_at_R", sigma=0)],
    )
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            NormSpec(**kw)
