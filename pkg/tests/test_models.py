"""Contract tests for the statistics family and its bound constants."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from fermicloud.fermi import bound_constant_C, fermi_f, fermi_f_inverse
from fermicloud.models import (
    GAP_MAJORANT_FORM,
    C_eta_majorant,
    H_value,
    ModelKind,
    ModelSpec,
    R_value,
    S_value,
    mu_from_eta,
    pressure,
    response_fn,
    sigma_d,
)
from fermicloud.numerics import ConfigError, DomainError


MB3 = ModelSpec.maxwell_boltzmann(3)
SFD = ModelSpec.simplified_fd(3, 1e-2)
FFD = ModelSpec.full_fd(3, 1e-2)


class TestModelSpec:
    def test_kinds_round_trip_json(self):
        for model in (MB3, SFD, FFD, ModelSpec.simplified_fd(7, 0.5)):
            assert ModelSpec.from_json(model.to_json()) == model

    @pytest.mark.parametrize("d", [2, 10, 3.5, -1])
    def test_dimension_range_enforced(self, d):
        with pytest.raises(ConfigError):
            ModelSpec.maxwell_boltzmann(d)

    def test_classical_kind_requires_zero_eta(self):
        with pytest.raises(ConfigError):
            ModelSpec(ModelKind.MAXWELL_BOLTZMANN, 3, 0.5)

    def test_degenerate_kind_requires_positive_eta(self):
        with pytest.raises(ConfigError):
            ModelSpec(ModelKind.FULL_FD, 3, 0.0)

    def test_full_kind_fills_in_mu(self):
        assert FFD.mu == pytest.approx(mu_from_eta(3, 1e-2), rel=1e-15)

    def test_inconsistent_mu_rejected(self):
        with pytest.raises(ConfigError):
            ModelSpec(ModelKind.FULL_FD, 3, 1e-2, mu=1.0)

    def test_malformed_json_rejected(self):
        with pytest.raises(ConfigError):
            ModelSpec.from_json('{"kind": "xx", "d": 3, "eta": 0.1}')


class TestGeometryConstants:
    def test_sphere_surface_d3(self):
        assert sigma_d(3) == pytest.approx(4.0 * math.pi, rel=1e-14)

    def test_sphere_surface_d4(self):
        # 2 pi^2 for the unit 3-sphere
        assert sigma_d(4) == pytest.approx(2.0 * math.pi**2, rel=1e-14)

    def test_mu_eta_relation(self):
        # eta mu^(2/d) = 2 d^(2/d - 1) at every tested pair
        for d in (3, 5, 9):
            for eta in (1e-3, 1e-1, 1.0):
                mu = mu_from_eta(d, eta)
                assert eta * mu ** (2.0 / d) == pytest.approx(
                    2.0 * d ** (2.0 / d - 1.0), rel=1e-12
                )

    def test_mu_frozen_value(self):
        assert mu_from_eta(3, 1e-2) == pytest.approx(1632.9931618554517, rel=1e-14)

    def test_mu_special_points(self):
        # eta = 2 d^(2/d-1) forces mu = 1; quartering it gives mu = 8 at d=3
        assert mu_from_eta(3, 2.0 * 3.0 ** (-1.0 / 3.0)) == pytest.approx(1.0, rel=1e-12)
        assert mu_from_eta(3, 2.0 * 3.0 ** (-1.0 / 3.0) / 4.0) == pytest.approx(
            8.0, rel=1e-12
        )

    def test_mu_homogeneity(self):
        for d in (3, 6):
            assert mu_from_eta(d, 0.05) / mu_from_eta(d, 0.1) == pytest.approx(
                2.0 ** (d / 2.0), rel=1e-12
            )

    def test_mu_rejects_nonpositive_eta(self):
        with pytest.raises((DomainError, ConfigError)):
            mu_from_eta(3, 0.0)


class TestResponse:
    def test_classical_identity(self):
        for z in (0.0, 1e-8, 1.0, 1e6):
            assert R_value(MB3, z) == z

    def test_simplified_closed_form(self):
        # R(z) = z / (1 + eta z^(1-1/d))
        for z in (1e-6, 0.1, 1.0, 100.0, 1e8):
            expected = z / (1.0 + 1e-2 * z ** (2.0 / 3.0))
            assert R_value(SFD, z) == pytest.approx(expected, rel=1e-14)

    def test_simplified_half_at_unit_eta(self):
        # (1/1 + 1/1)^(-1) = 1/2, and the gap picks up the other half
        unit = ModelSpec.simplified_fd(3, 1.0)
        assert R_value(unit, 1.0) == pytest.approx(0.5, rel=1e-14)
        assert S_value(unit, 1.0) == pytest.approx(0.5, rel=1e-14)

    @pytest.mark.parametrize("model", [SFD, FFD], ids=["sfd", "ffd"])
    def test_response_below_identity(self, model):
        for z in np.logspace(-6, 8, 29):
            r = R_value(model, float(z))
            assert 0.0 < r <= z

    @pytest.mark.parametrize("model", [MB3, SFD, FFD], ids=["mb", "sfd", "ffd"])
    def test_strictly_increasing(self, model):
        zs = np.logspace(-4, 6, 41)
        values = [R_value(model, float(z)) for z in zs]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_full_kind_classical_limit(self):
        # small eta pushes the full response onto the identity
        weak = ModelSpec.full_fd(3, 1e-4)
        assert R_value(weak, 1.0) == pytest.approx(1.0, rel=1e-2)

    def test_full_kind_gap_controlled_by_majorant(self):
        weak = ModelSpec.full_fd(3, 1e-5)
        C, _ = C_eta_majorant(weak)
        for z in np.logspace(-3, 3, 13):
            z = float(z)
            assert z - R_value(weak, z) <= C * z ** (1.0 + 2.0 / 3.0) * (1 + 1e-9)

    def test_full_kind_from_fermi_composition(self):
        # R(z) = mu (d-2)/4 f_(d/2-2)(f_(d/2-1)^(-1)(2z/mu)) at d=3, by hand
        mu = FFD.mu
        z = 5.0
        v = fermi_f_inverse(0.5, 2.0 * z / mu)
        expected = mu * (3.0 - 2.0) / 4.0 * fermi_f(-0.5, v)
        assert R_value(FFD, z) == pytest.approx(expected, rel=1e-9)

    def test_zero_maps_to_zero(self):
        for model in (MB3, SFD, FFD):
            assert R_value(model, 0.0) == 0.0

    def test_negative_argument_rejected(self):
        with pytest.raises(DomainError):
            R_value(SFD, -1.0)

    @pytest.mark.parametrize("model", [MB3, SFD, FFD], ids=["mb", "sfd", "ffd"])
    def test_specialized_closure_agrees(self, model):
        f = response_fn(model)
        for z in (1e-9, 0.37, 12.0, 1e5):
            assert f(z) == pytest.approx(R_value(model, z), rel=1e-12, abs=1e-300)


class TestGap:
    def test_classical_gap_is_zero(self):
        for z in (0.0, 1.0, 1e8):
            assert S_value(MB3, z) == 0.0

    def test_matches_definition(self):
        for model in (SFD, FFD):
            for z in (0.1, 1.0, 50.0):
                assert S_value(model, z) == pytest.approx(
                    z - R_value(model, z), rel=1e-9
                )

    def test_simplified_gap_no_cancellation(self):
        # the closed form stays relatively accurate where z - R(z) would
        # lose every significant digit to cancellation
        z = 1e-12
        expected = z * 1e-2 * z ** (2.0 / 3.0) / (1.0 + 1e-2 * z ** (2.0 / 3.0))
        assert S_value(SFD, z) == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("model", [SFD, FFD], ids=["sfd", "ffd"])
    def test_nonnegative(self, model):
        for z in np.logspace(-8, 8, 33):
            assert S_value(model, float(z)) >= 0.0


class TestEnthalpy:
    def test_classical_is_log(self):
        assert H_value(MB3, 2.5) == math.log(2.5)

    def test_derivative_identity(self):
        # H'(z) R(z) = 1 for every kind
        h = 1e-6
        for model in (MB3, SFD, FFD):
            for z in (0.5, 2.0, 20.0):
                deriv = (H_value(model, z + h) - H_value(model, z - h)) / (2.0 * h)
                assert deriv * R_value(model, z) == pytest.approx(1.0, rel=1e-6)

    def test_simplified_closed_form_value(self):
        # log 1 + (3/2) eta z^(2/3) at z = 1, eta = 1
        assert H_value(ModelSpec.simplified_fd(3, 1.0), 1.0) == pytest.approx(
            1.5, rel=1e-14
        )

    def test_log_singularity_matched(self):
        # H - log z -> 0 as z -> 0
        for model, z, tol in [(SFD, 1e-4, 1e-4), (FFD, 1e-3, 1e-5)]:
            assert H_value(model, z) - math.log(z) == pytest.approx(0.0, abs=tol)

    def test_zero_rejected(self):
        with pytest.raises(DomainError):
            H_value(SFD, 0.0)


class TestPressure:
    def test_classical_ideal_gas(self):
        for rho, theta in [(1.0, 1.0), (3.0, 0.5), (0.1, 7.0)]:
            assert pressure(MB3, rho, theta) == pytest.approx(rho * theta, rel=1e-12)

    def test_simplified_matches_quadrature(self):
        # P(z) = int_0^z t / R(t) dt, compared against direct quadrature
        z = 2.0
        target, _ = quad(lambda t: t / R_value(SFD, t), 0.0, z, epsabs=0, epsrel=1e-12)
        assert pressure(SFD, z, 1.0) == pytest.approx(target, rel=1e-10)

    def test_degeneracy_raises_pressure(self):
        assert pressure(SFD, 1.0, 1.0) > pressure(MB3, 1.0, 1.0)

    def test_full_kind_classical_limit(self):
        weak = ModelSpec.full_fd(3, 1e-4)
        assert pressure(weak, 1.0, 1.0) == pytest.approx(1.0, rel=1e-2)

    def test_scaling_closure(self):
        # p(theta, rho) = theta^(d/2+1) P(rho theta^(-d/2)) by construction:
        # doubling theta at fixed z scales p by 2^(d/2+1)
        d = 3
        z = 0.7
        theta1, theta2 = 1.0, 2.0
        p1 = pressure(SFD, z * theta1 ** (d / 2.0), theta1)
        p2 = pressure(SFD, z * theta2 ** (d / 2.0), theta2)
        assert p2 / p1 == pytest.approx(2.0 ** (d / 2.0 + 1.0), rel=1e-12)

    def test_zero_density(self):
        assert pressure(SFD, 0.0, 1.0) == 0.0

    def test_nonpositive_temperature_rejected(self):
        with pytest.raises(DomainError):
            pressure(SFD, 1.0, 0.0)


class TestGapMajorant:
    def test_classical_constant_is_zero(self):
        C, form = C_eta_majorant(MB3)
        assert C == 0.0
        assert form == GAP_MAJORANT_FORM

    def test_majorant_actually_majorizes(self):
        for model in (SFD, FFD):
            C, _ = C_eta_majorant(model)
            for z in np.logspace(-6, 8, 29):
                z = float(z)
                assert S_value(model, z) <= C * z ** (1.0 + 2.0 / model.d) * (1 + 1e-9)

    def test_simplified_constant_at_most_one_up_to_unit_eta(self):
        for eta in (1.0, 0.5, 1e-1, 1e-2):
            C, _ = C_eta_majorant(ModelSpec.simplified_fd(3, eta))
            assert C <= 1.0 + 1e-9

    def test_simplified_tracks_eta(self):
        # C(eta) ~ eta for the algebraic surrogate
        for eta in (1e-1, 1e-2, 1e-3):
            C, _ = C_eta_majorant(ModelSpec.simplified_fd(3, eta))
            assert C == pytest.approx(eta, rel=1e-2)

    def test_full_kind_scaling_identity(self):
        # C_eta = (2/mu)^(2/d) C(d): the response is a pure rescaling of the
        # defect whose peak the dimension constant records
        for eta in (1e-1, 1e-2):
            model = ModelSpec.full_fd(3, eta)
            C, _ = C_eta_majorant(model)
            Cd, _ = bound_constant_C(3)
            assert C <= (2.0 / model.mu) ** (2.0 / 3.0) * Cd * 1.02
            assert C == pytest.approx((2.0 / model.mu) ** (2.0 / 3.0) * Cd, rel=1e-2)

    def test_decreasing_to_zero_along_eta_ladder(self):
        values = [
            C_eta_majorant(ModelSpec.simplified_fd(3, eta))[0]
            for eta in (1e-1, 1e-2, 1e-3, 1e-4)
        ]
        assert all(b < a for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-3
