"""Level transforms: couplings, routes, product maps, and line inverses."""
from __future__ import annotations

import numpy as np
import pytest

from kplab.darboux import (
    LinearDarboux,
    MiuraData,
    OneDimDarboux,
    backlund_catalog,
    backlund_residual,
    bump_profile,
    carried_from_primitive,
    commutation_residuals,
    darboux_map_products,
    factorization_residuals,
    flow_intertwining_residual,
    identity_report,
    kernel_membership,
    kink_profile,
    level_shift_residuals,
    minus_kernel_profile,
    miura_lax_identity,
    mode_transfer_residuals,
    pair_wronskian,
    phase_sum,
    sample_points,
    t1_apply,
    t1_roundtrip,
)
from kplab.errors import (
    AlphaOutOfRange,
    CaseMismatch,
    ConfigMismatch,
    InadmissibleEta,
    InvalidBranch,
    MissingPrimitive,
    OrthogonalityViolation,
    PoleAtKappa,
    RegionViolation,
)
from kplab.expsum import Carried
from kplab.jost import JostFamily, pair_product
from kplab.solitons import SolitonConfig, sech2, theta_eval
from kplab.tanhexp import Profile1D, TanhExp

KP = (-2.0, -1.0, 0.5, 3.0)
KO = (-2.0, -1.0, 1.0, 2.0)
K3 = (-1.0, 0.3, 2.0)
CP = 0.5625  # quarter squared gap of the inner channel of KP


def pts(seed=0, n=12):
    return sample_points(seed=seed, n=n)


def p_chain():
    fam1 = JostFamily(SolitonConfig("one_line", KP, pair=(2, 3)))
    fam2 = JostFamily(SolitonConfig("p_type", KP))
    return fam1, fam2


# ----- bilinear pair coupling -----


def test_catalog_pairs_satisfy_both_couplings():
    x, y, t = pts(1)
    for name, tau1, tau2 in backlund_catalog():
        rx, rt = backlund_residual(tau1, tau2, x, y, t)
        assert rx < 1e-9 and rt < 1e-9, f"{name}: {rx:.2e}, {rt:.2e}"


def test_elementary_pair_is_machine_exact():
    x, y, t = pts(2)
    cat = {name: (t1, t2) for name, t1, t2 in backlund_catalog()}
    rx, rt = backlund_residual(*cat["line_over_vacuum"], x, y, t)
    assert rx < 1e-12 and rt < 1e-12


def test_wrong_partner_is_refuted():
    """A lower tau that is not a cofactor row fails the coupling loudly."""
    x, y, t = pts(3)
    tau2 = pair_wronskian(KP, (1.0, 1.3, 0.0, 0.0), (0.0, 0.0, 1.0, 0.7))
    wrong = phase_sum(KP, (1.0, 0.7, 0.0, 0.0))
    rx, rt = backlund_residual(wrong, tau2, x, y, t)
    assert rx > 1e-3 and rt > 1e-3


def test_shifted_line_low_matches_closed_form():
    """The low shifted pair is a single line with a computable offset."""
    a, b = 0.7, 1.3
    x, y, t = pts(4)
    cat = {name: (t1, t2) for name, t1, t2 in backlund_catalog()}
    u2 = MiuraData(*cat["shifted_line_low"]).u2
    th1 = theta_eval(K3, 1, x, y, t)
    th2 = theta_eval(K3, 2, x, y, t)
    mu = 0.5 * np.log(a * (K3[2] - K3[1]) / (K3[2] - K3[0]))
    expected = 0.5 * (K3[1] - K3[0]) ** 2 * sech2(0.5 * (th2 - th1) + mu)
    got = u2.eval(x, y, t).real
    assert np.max(np.abs(got - expected)) < 1e-10 * np.max(np.abs(expected))


def test_shifted_line_high_matches_closed_form():
    a, b = 0.7, 1.3
    x, y, t = pts(5)
    cat = {name: (t1, t2) for name, t1, t2 in backlund_catalog()}
    u2 = MiuraData(*cat["shifted_line_high"]).u2
    th2 = theta_eval(K3, 2, x, y, t)
    th3 = theta_eval(K3, 3, x, y, t)
    mu = 0.5 * np.log((b / a) * (K3[2] - K3[0]) / (K3[1] - K3[0]))
    expected = 0.5 * (K3[2] - K3[1]) ** 2 * sech2(0.5 * (th3 - th2) + mu)
    got = u2.eval(x, y, t).real
    assert np.max(np.abs(got - expected)) < 1e-10 * np.max(np.abs(expected))


def test_three_phase_partners_build_one_tau():
    """Two different second rows span the same three-phase Wronskian."""
    b, a = 1.3, 0.7
    x, y, t = pts(6)
    skew = pair_wronskian(K3, (1.0, 0.0, -b), (0.0, 1.0, a))
    mixed = pair_wronskian(K3, (1.0, b / a, 0.0), (0.0, 1.0, a))
    vs, vm = skew.eval(x, y, t), mixed.eval(x, y, t)
    assert np.max(np.abs(vs - vm)) < 1e-12 * np.max(np.abs(vs))


def test_pair_wronskian_length_mismatch():
    with pytest.raises(ConfigMismatch):
        phase_sum(K3, (1.0, 2.0))


# ----- pair potentials -----


@pytest.mark.parametrize("label", ["p_chain", "vacuum_line", "vacuum_three", "o_ch12", "o_ch34"])
def test_pair_invariants(label):
    x, y, t = pts(7)
    if label == "p_chain":
        fam1, fam2 = p_chain()
        data = MiuraData(fam1.tau, fam2.tau)
    elif label == "vacuum_line":
        data = MiuraData(None, JostFamily(SolitonConfig("one_line", K3, pair=(1, 3))).tau)
    elif label == "vacuum_three":
        data = MiuraData(None, phase_sum(K3, (1.0, 0.7, 1.3)))
    else:
        pair = (1, 2) if label == "o_ch12" else (3, 4)
        low = JostFamily(SolitonConfig("one_line", KO, pair=pair))
        data = MiuraData(low.tau, JostFamily(SolitonConfig("o_type", KO)).tau)
    res = data.invariant_residuals(x, y, t)
    for name, val in res.items():
        assert val < 1e-10, f"{label}/{name}: {val:.2e}"


def test_invariants_refute_uncoupled_pair():
    x, y, t = pts(8)
    data = MiuraData(phase_sum(KP, (1.0, 0.7, 0.0, 0.0)),
                     pair_wronskian(KP, (1.0, 1.3, 0.0, 0.0), (0.0, 0.0, 1.0, 0.7)))
    res = data.invariant_residuals(x, y, t)
    assert res["map_plus"] > 1e-3 and res["flow"] > 1e-3


# ----- first-order transforms -----


def test_transform_signs_differ_by_twice_dx():
    fam1, fam2 = p_chain()
    data = MiuraData(fam1.tau, fam2.tau)
    wave = carried_from_primitive(fam1.phi(beta=0.9) * fam2.phi_star(beta=0.37))
    x, y, t = pts(9)
    plus = LinearDarboux(data.v, 1)
    diff = plus.apply(wave, x, y, t) - plus.star().apply(wave, x, y, t)
    twice = 2.0 * wave.value.dx().eval(x, y, t)
    assert np.max(np.abs(diff - twice)) < 1e-12 * np.max(np.abs(twice))


def test_transform_star_flips_sign_only():
    op = LinearDarboux(MiuraData(None, phase_sum(K3, (1.0, 0.7, 0.0))).v, -1)
    assert op.star().sign == 1 and op.star().v is op.v


def test_transform_sign_validated():
    data = MiuraData(None, phase_sum(K3, (1.0, 0.7, 0.0)))
    with pytest.raises(ValueError):
        LinearDarboux(data.v, 0)


def test_transform_needs_nonlocal_data():
    data = MiuraData(None, phase_sum(K3, (1.0, 0.7, 0.0)))
    bare = Carried(data.u2)
    with pytest.raises(MissingPrimitive):
        LinearDarboux(data.v, 1).parts(bare)


# ----- conjugation routes -----


@pytest.mark.parametrize("which", range(1, 9))
def test_conjugation_routes_on_mixed_product(which):
    fam1, fam2 = p_chain()
    data = MiuraData(fam1.tau, fam2.tau)
    wave = carried_from_primitive(fam1.phi(beta=0.9) * fam2.phi_star(beta=0.37))
    x, y, t = pts(10, n=10)
    assert miura_lax_identity(data, which, wave, x, y, t) < 1e-9


def test_routes_on_plane_pair_with_manual_carry():
    """A bare exponential pair carried by hand passes the base routes."""
    beta, beta_prime = 1.1, 0.25
    fam0 = JostFamily(SolitonConfig("vacuum", ()))
    fam1 = JostFamily(SolitonConfig("one_line", K3, pair=(1, 2)))
    prod = fam0.phi(beta=beta) * fam0.phi_star(beta=beta_prime)
    wave = Carried(prod, xprim=prod * (1.0 / (beta - beta_prime)),
                   ydxinv=(beta + beta_prime) * prod)
    data = MiuraData(None, fam1.tau)
    x, y, t = pts(11, n=10)
    assert miura_lax_identity(data, 4, wave, x, y, t) < 1e-12
    assert miura_lax_identity(data, 2, wave, x, y, t) < 1e-9


def test_routes_need_exact_primitive():
    fam1, fam2 = p_chain()
    data = MiuraData(fam1.tau, fam2.tau)
    wave = pair_product(fam1.phi(beta=0.9), fam1.phi_star(beta=0.37))
    x, y, t = pts(12, n=4)
    with pytest.raises(MissingPrimitive):
        miura_lax_identity(data, 1, wave, x, y, t)


def test_route_index_validated():
    fam1, fam2 = p_chain()
    data = MiuraData(fam1.tau, fam2.tau)
    wave = carried_from_primitive(fam1.phi(beta=0.9) * fam2.phi_star(beta=0.37))
    x, y, t = pts(13, n=2)
    with pytest.raises(ValueError):
        miura_lax_identity(data, 9, wave, x, y, t)


# ----- linearized flow intertwining -----


@pytest.mark.parametrize("sign", [1, -1])
def test_flow_intertwining_over_vacuum(sign):
    fam0 = JostFamily(SolitonConfig("vacuum", ()))
    fam1 = JostFamily(SolitonConfig("one_line", K3, pair=(1, 2)))
    data = MiuraData(None, fam1.tau)
    wave = carried_from_primitive(fam0.phi(beta=0.9) * fam1.phi_star(beta=0.37))
    x, y, t = pts(14, n=6)
    assert flow_intertwining_residual(data, sign, wave, x, y, t) < 1e-9


@pytest.mark.parametrize("sign", [1, -1])
def test_flow_intertwining_on_four_phase_chain(sign):
    fam1, fam2 = p_chain()
    data = MiuraData(fam1.tau, fam2.tau)
    wave = carried_from_primitive(fam1.phi(beta=0.9) * fam2.phi_star(beta=0.37))
    x, y, t = pts(15, n=4)
    assert flow_intertwining_residual(data, sign, wave, x, y, t) < 1e-9


def test_flow_intertwining_sign_validated():
    fam1, fam2 = p_chain()
    data = MiuraData(fam1.tau, fam2.tau)
    wave = carried_from_primitive(fam1.phi(beta=0.9) * fam2.phi_star(beta=0.37))
    with pytest.raises(ValueError):
        flow_intertwining_residual(data, 2, wave, *pts(16, n=2))


# ----- level maps on wave-dual products -----


@pytest.mark.parametrize("direction", ["plus", "minus"])
def test_product_maps_four_phase(direction):
    x, y, t = pts(17, n=10)
    res = darboux_map_products(SolitonConfig("p_type", KP), direction, 1.7, 0.4, x, y, t)
    for name, val in res.items():
        assert val < 1e-9, f"{name}: {val:.2e}"
    if direction == "minus":
        assert res["kernel_one"] < 1e-10 and res["kernel_two"] < 1e-10


@pytest.mark.parametrize("direction", ["plus", "minus"])
def test_product_maps_split_type(direction):
    x, y, t = pts(18, n=10)
    res = darboux_map_products(SolitonConfig("o_type", KO), direction, 1.7, 0.4, x, y, t)
    assert len(res) == 4
    for name, val in res.items():
        assert val < 1e-9, f"{name}: {val:.2e}"


def test_product_maps_reject_pole_proximity():
    with pytest.raises(PoleAtKappa):
        darboux_map_products(SolitonConfig("p_type", KP), "plus", 0.5, 0.4)


def test_product_maps_reject_other_kinds():
    cfg = SolitonConfig("one_line", K3, pair=(1, 2))
    with pytest.raises(ConfigMismatch):
        darboux_map_products(cfg, "plus", 1.7, 0.4, *pts(19, n=2))


def test_product_maps_validate_direction():
    with pytest.raises(ValueError):
        darboux_map_products(SolitonConfig("p_type", KP), "sideways", 1.7, 0.4)


# ----- level shifts -----


def test_level_shifts_four_phase():
    res = level_shift_residuals(SolitonConfig("p_type", KP), 1.7, *pts(20, n=10))
    assert set(res) == {f"{a}_{b}" for a in ("wave_step", "dual_step", "wave_heat", "dual_heat")
                        for b in ("one", "two")}
    for name, val in res.items():
        assert val < 1e-9, f"{name}: {val:.2e}"


def test_level_shifts_split_type():
    res = level_shift_residuals(SolitonConfig("o_type", KO), 1.7, *pts(21, n=10))
    assert len(res) == 8
    for name, val in res.items():
        assert val < 1e-9, f"{name}: {val:.2e}"


def test_level_shifts_reject_vacuum():
    with pytest.raises(ConfigMismatch):
        level_shift_residuals(SolitonConfig("vacuum", ()), 1.7, *pts(22, n=2))


# ----- resonant transfers -----


@pytest.mark.parametrize("eta", [0.4, 1.9, 0.3 + 0.2j])
def test_mode_transfer_identities(eta):
    res = mode_transfer_residuals(SolitonConfig("p_type", KP), eta, *pts(23, n=10))
    for name, val in res.items():
        assert val < 1e-9, f"eta={eta} {name}: {val:.2e}"


def test_mode_transfer_needs_inner_channel():
    with pytest.raises(CaseMismatch):
        mode_transfer_residuals(SolitonConfig("o_type", KO), 0.4, *pts(24, n=2))


# ----- one-dimensional transforms -----


@pytest.mark.parametrize("eta", [2.0, 0.3, 0.0, 1.2 + 0.7j])
def test_line_factorizations(eta):
    res = factorization_residuals(CP, eta, bump_profile(CP))
    for name, val in res.items():
        assert val < 1e-10, f"eta={eta} {name}: {val:.2e}"


@pytest.mark.parametrize("drift", [25.0 / 6.0, -0.7])
def test_line_commutation(drift):
    res = commutation_residuals(CP, 1.3, drift, bump_profile(CP))
    assert res["plus"] < 1e-8 and res["minus"] < 1e-8


@pytest.mark.parametrize("eta", [2.0, 0.3, 0.9 + 0.4j])
def test_minus_kernel_membership(eta):
    assert kernel_membership(CP, eta) < 1e-9


def test_mirrored_kernel_in_complex_strip():
    # imaginary part chosen so the branch root drops below the channel rate
    assert kernel_membership(CP, 0.1 + 0.45j, reflected=True) < 1e-9
    prof = minus_kernel_profile(CP, 0.1 + 0.45j, reflected=True)
    zs = np.linspace(-6.0, 6.0, 25)
    assert np.all(np.isfinite(prof.value.eval(zs)))


def test_mirrored_kernel_rejects_real_eta():
    with pytest.raises(InadmissibleEta):
        minus_kernel_profile(CP, 2.0, reflected=True)


def test_kernel_needs_positive_gap():
    with pytest.raises(InvalidBranch):
        minus_kernel_profile(-0.25, 1.0)


def test_exact_and_sampled_transforms_agree():
    op = OneDimDarboux(CP, 1.1, alpha=0.3)
    f = bump_profile(CP)
    exact = op.m_apply(1, f).eval(op.grid.z)
    sampled = op.m_apply_sampled(1, f)
    inner = np.abs(op.grid.z) <= op.window - 1.5
    err = np.max(np.abs(exact - sampled)[inner]) / np.max(np.abs(exact))
    assert err < 1e-9


@pytest.mark.parametrize("sign", [1, -1])
def test_inverse_roundtrip_high_region(sign):
    op = OneDimDarboux(CP, 2.0, alpha=0.3)
    assert t1_roundtrip(op, sign, bump_profile(CP)) < 1e-7


@pytest.mark.parametrize("eta", [0.0, 0.3])
def test_inverse_roundtrip_low_minus(eta):
    op = OneDimDarboux(CP, eta, alpha=0.3)
    assert t1_roundtrip(op, -1, bump_profile(CP), low=True) < 1e-7


def test_inverse_roundtrip_low_plus_on_orthogonal_input():
    """Transforming first lands in the solvable span, where the low inverse
    is a true two-sided inverse."""
    op = OneDimDarboux(CP, 0.0, alpha=0.3)
    f = bump_profile(CP)
    h = op.m_apply(1, f)
    assert t1_roundtrip(op, 1, h, low=True) < 1e-7
    v = t1_apply(op, 1, h, low=True)
    fv = f.value.eval(op.grid.z)
    inner = np.abs(op.grid.z) <= op.window - 1.5
    assert np.max(np.abs(v - fv)[inner]) / np.max(np.abs(fv)) < 1e-7


@pytest.mark.parametrize("sign,eta", [(1, 0.3 + 0.18j), (-1, 0.3 - 0.18j)])
def test_split_channel_complex_frequency_roundtrip(sign, eta):
    # the imaginary part keeps the branch root above the gate at both signs
    op = OneDimDarboux(0.25, eta, alpha=0.03, window=96)
    assert t1_roundtrip(op, sign, bump_profile(0.25)) < 1e-7


def test_low_frequency_gates():
    op = OneDimDarboux(CP, 0.0, alpha=0.3)
    f = bump_profile(CP)
    with pytest.raises(RegionViolation):
        t1_apply(op, -1, f)
    with pytest.raises(RegionViolation):
        t1_apply(op, 1, f)
    op2 = OneDimDarboux(CP, 2.0, alpha=0.3)
    with pytest.raises(RegionViolation):
        t1_apply(op2, 1, f, low=True)


def test_secular_pairing_gate():
    op = OneDimDarboux(CP, 0.0, alpha=0.3)
    with pytest.raises(OrthogonalityViolation):
        t1_apply(op, 1, bump_profile(CP), low=True)


def test_weight_gates():
    f = bump_profile(CP)
    with pytest.raises(AlphaOutOfRange):
        t1_apply(OneDimDarboux(CP, 2.0), 1, f)
    with pytest.raises(AlphaOutOfRange):
        t1_apply(OneDimDarboux(CP, 2.0, alpha=1.5), 1, f)
    with pytest.raises(AlphaOutOfRange):
        OneDimDarboux(CP, 2.0, alpha=-0.1)


def test_sampled_input_shape_checked():
    op = OneDimDarboux(CP, 2.0, alpha=0.3)
    with pytest.raises(ConfigMismatch):
        t1_apply(op, 1, np.zeros(5))


def test_transform_sign_checked_everywhere():
    op = OneDimDarboux(CP, 2.0, alpha=0.3)
    f = bump_profile(CP)
    with pytest.raises(ValueError):
        op.m_apply(0, f)
    with pytest.raises(ValueError):
        op.m_apply_sampled(2, f.value.eval(op.grid.z))
    with pytest.raises(ValueError):
        t1_apply(op, 0, f)


def test_kink_and_bump_profiles():
    psi = kink_profile(CP)
    zs = np.linspace(-4.0, 4.0, 33)
    assert np.max(np.abs(psi.eval(zs) - 0.75 * np.tanh(0.75 * zs))) < 1e-12
    f = bump_profile(CP)
    got = f.prim().d().eval(zs)
    assert np.max(np.abs(got - f.value.eval(zs))) < 1e-12
    assert abs(f.prim().eval(np.array([40.0]))[0]) < 1e-12


# ----- aggregate report -----


def test_identity_report_is_green_and_stable():
    rep = identity_report(npts=8)
    assert len(rep) >= 70
    for key in ("p_raise_two_mixed", "o_lower_wave_ch34", "p_shift_dual_heat_two",
                "p_branch_transfer_minus", "pair_line_over_vacuum_x"):
        assert key in rep
    worst = max(rep.values())
    assert worst < 1e-9, f"worst residual {worst:.2e}"
