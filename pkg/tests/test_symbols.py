import math

import numpy as np
import pytest

from lcl.errors import MethodError
from lcl.potentials import PotentialModel, mean_value_radial_profile, mean_value_transform
from lcl.specfun import laguerre, legendre_rule
from lcl.symbols import (RadialSymbolProfile, circle_convolution,
                         circle_symbol_profile, hs_distance, hs_distance_fourier,
                         i_rho, laguerre_smoothing, psi_q, scaled_symbol_identity,
                         smoothed_symbol_profile, v_B)

ISO = PotentialModel.isotropic(0.5)
ANISO = PotentialModel.anisotropic(0.5, 0.3, 2)


def test_v_b_radial_rescaling():
    # radial model: V_B(x) = V(|x|/sqrt(B))
    got = v_B(ISO, 4.0, (2.0, 0.0))
    assert abs(got - (1.0 + 1.0) ** -0.25) < 1e-15


def test_v_b_swap_negate():
    for x in ((0.3, -1.2), (2.0, 0.7)):
        got = v_B(ANISO, 1.0, x)
        ref = float(ANISO.value(-x[1], -x[0]))
        assert got == ref


def test_v_b_involution():
    # the argument map (x1, x2) -> (-x2, -x1) composed with itself is identity
    x = (0.8, -0.45)
    once = (-x[1], -x[0])
    twice = (-once[1], -once[0])
    assert twice == x
    assert v_B(ANISO, 1.0, once) == float(ANISO.value(*x))


def test_psi_q_at_origin():
    assert abs(psi_q(0, 0.0, 0.0) - 1.0 / math.pi) < 1e-16
    for q in (1, 2, 7):
        assert abs(psi_q(q, 0.0, 0.0) - (-1.0) ** q / math.pi) < 1e-15


@pytest.mark.parametrize("q", [0, 1, 5])
def test_psi_q_unit_mass(q):
    # radial quadrature of 2 pi Psi_q t dt; oracle: int_0^inf L_q(2u) e^-u du = (-1)^q
    x, w = legendre_rule(400)
    hi = 4.0 * q + 90.0
    u = 0.5 * hi * (x + 1.0)
    wu = 0.5 * hi * w
    oracle = float(np.dot(wu, laguerre(q, 2.0 * u) * np.exp(-u)))
    assert abs(oracle - (-1.0) ** q) < 1e-10
    t = np.sqrt(u)
    mass = float(np.dot(wu, math.pi * psi_q(q, t, 0.0)))  # du = 2 t dt
    assert abs(mass - 1.0) < 1e-8


def test_circle_convolution_constant():
    f = lambda x, y: np.ones_like(np.asarray(x))
    assert abs(circle_convolution(f, 2.5, (0.4, 1.1)) - 1.0) < 1e-12


def test_circle_convolution_radius_one_is_mean_value():
    tail = ISO.tail_field()
    for x in ((3.0, 0.0), (0.2, 0.4)):
        got = circle_convolution(tail, 1.0, x)
        ref = mean_value_transform(tail, x)
        assert abs(got - ref) < 1e-12


def test_circle_convolution_preserves_radial_symmetry():
    tail = ISO.tail_field()
    vals = [circle_convolution(tail, 2.0, (5.0 * math.cos(a), 5.0 * math.sin(a)))
            for a in np.linspace(0.0, 2.0 * math.pi, 8, endpoint=False)]
    assert max(vals) - min(vals) < 1e-12


def test_circle_convolution_homogeneity_scaling():
    # (tail * delta_k)(z) = k^-rho m(|z|/k)
    tail = ISO.tail_field()
    for (k, s) in ((3.0, 7.5), (10.0, 2.0)):
        z = (s * math.cos(0.3), s * math.sin(0.3))
        got = circle_convolution(tail, k, z)
        ref = k ** -0.5 * mean_value_radial_profile(0.5, s / k)
        assert abs(got - ref) < 1e-8


def test_laguerre_smoothing_constant_is_one():
    wide = PotentialModel.gaussian_bump(1.0, 1e7)
    for q in (0, 1, 5):
        assert abs(laguerre_smoothing(wide, 1.0, q, (0.7, -0.3)) - 1.0) < 1e-8


def test_laguerre_smoothing_gaussian_closed_form():
    # Psi_0 is the normalized Gaussian e^{-|y|^2}/pi; convolving two radial
    # Gaussians has the closed form (s2/(s2+1/2)) exp(-|z|^2/(2(s2+1/2)))
    g = PotentialModel.gaussian_bump(1.0, 1.0)
    for B in (1.0, 2.0):
        s2 = B  # V_B has squared width w^2 B
        for z in ((0.0, 0.0), (1.3, 0.4)):
            got = laguerre_smoothing(g, B, 0, z)
            r2 = z[0] ** 2 + z[1] ** 2
            ref = (s2 / (s2 + 0.5)) * math.exp(-r2 / (2.0 * (s2 + 0.5)))
            assert abs(got - ref) < 1e-7


def test_laguerre_smoothing_radial_symmetry():
    vals = [laguerre_smoothing(ISO, 1.0, 3, (2.0 * math.cos(a), 2.0 * math.sin(a)))
            for a in np.linspace(0.0, 2.0 * math.pi, 8, endpoint=False)]
    assert max(vals) - min(vals) < 1e-9


def test_laguerre_smoothing_order_cap():
    with pytest.raises(ValueError):
        laguerre_smoothing(ISO, 1.0, 65, (0.0, 0.0))


def test_hs_distance_zero_potential():
    zero = PotentialModel.isotropic(0.5, amplitude=0.0)
    assert hs_distance(zero, 1.0, 4) == 0.0


def test_hs_distance_records_truncation():
    val, meta = hs_distance(ISO, 1.0, 2, detail=True)
    assert val > 0.0
    assert meta["s_max"] > 0.0
    assert meta["relative_tail"] < 0.10


def test_hs_distance_requires_isotropic():
    with pytest.raises(MethodError):
        hs_distance(ANISO, 1.0, 2)
    with pytest.raises(ValueError):
        hs_distance(ISO, 1.0, 64)


def test_hs_distance_amplitude_linearity():
    scaled = PotentialModel.isotropic(0.5, amplitude=-2.0)
    a = hs_distance(scaled, 1.0, 2)
    b = hs_distance(ISO, 1.0, 2)
    assert abs(a - 2.0 * b) < 1e-12


def test_i_rho_at_zero_k():
    for rho in (0.3, 0.5, 2.0):
        assert i_rho(0.0, rho) == 1.0


def test_i_rho_arctan_closed_form():
    for k in (0.5, 5.0, 300.0):
        assert abs(i_rho(k, 2.0) - math.atan(k) / k) < 1e-12


def test_scaled_symbol_identity_isotropic_profile_oracle():
    # both sides must equal m(3) for |z| = 3 sqrt(2q+1), B = 1
    for q in (0, 2, 8):
        k = math.sqrt(2.0 * q + 1.0)
        z = (3.0 * k * math.cos(0.4), 3.0 * k * math.sin(0.4))
        lhs, rhs = scaled_symbol_identity(ISO, 1.0, q, z)
        ref = mean_value_radial_profile(0.5, 3.0)
        assert abs(lhs - ref) < 1e-8
        assert abs(rhs - ref) < 1e-8


def test_scaled_symbol_identity_field_scaling():
    # doubling B multiplies both sides by 2^rho at fixed z/sqrt(B) geometry
    q = 4
    k = math.sqrt(2.0 * q + 1.0)
    z1 = (2.0 * k, 0.5 * k)
    lhs1, rhs1 = scaled_symbol_identity(ISO, 1.0, q, z1)
    lhs2, rhs2 = scaled_symbol_identity(ISO, 2.0, q, z1)
    assert abs(lhs2 - 2.0 ** 0.5 * lhs1) < 1e-10
    assert abs(rhs2 - 2.0 ** 0.5 * rhs1) < 1e-10


def test_operator_norm_surrogate_bounded():
    # sup_z of the circle symbol of <x>^-rho times k^rho stays bounded in k
    from lcl.potentials import power_cos_average
    for rho in (0.3, 0.5, 0.7):
        sups = []
        for k in (2.0, 10.0, 100.0, 1000.0):
            s = np.linspace(0.0, 2.0 * k, 400)
            a = 1.0 + s * s + k * k
            vals = power_cos_average(a, 2.0 * s * k, rho, gap=1.0 + (s - k) ** 2)
            sups.append(float(np.max(vals)) * k ** rho)
        assert max(sups) < 3.0
        assert max(sups) / min(sups) < 3.0


def test_profiles_export_and_validation(tmp_path):
    prof = circle_symbol_profile(ISO, 1.0, 2, np.array([0.5, 1.0, 4.0]))
    path = tmp_path / "profile.csv"
    prof.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "r,value"
    assert len(lines) == 4
    with pytest.raises(ValueError):
        RadialSymbolProfile(np.array([1.0, 1.0]), np.array([0.0, 0.0]), {})
    with pytest.raises(ValueError):
        RadialSymbolProfile(np.array([1.0, 2.0]), np.array([0.0, np.inf]), {})


def test_smoothed_profile_tracks_circle_profile():
    # at moderate q the two symbols already agree to a few percent
    radii = np.array([6.0, 9.0, 14.0])
    sm = smoothed_symbol_profile(ISO, 1.0, 12, radii)
    ci = circle_symbol_profile(ISO, 1.0, 12, radii)
    rel = np.abs(sm.values - ci.values) / np.abs(ci.values)
    assert np.max(rel) < 0.05
