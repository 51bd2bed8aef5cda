"""Wave families: annihilation, residues, completeness, products, kernels."""
from __future__ import annotations

import numpy as np
import pytest

from kplab.errors import PoleAtKappa
from kplab.jost import JostFamily, green_kernel_checks, product_residuals
from kplab.solitons import SolitonConfig, theta_eval

KP = (-2.0, -1.0, 0.5, 3.0)
KO = (-2.0, -1.0, 1.0, 2.0)


def families():
    return {
        "p": JostFamily(SolitonConfig("p_type", KP)),
        "o": JostFamily(SolitonConfig("o_type", KO)),
        "one": JostFamily(SolitonConfig("one_line", (-1.0, 1.0), pair=(1, 2))),
        "narrow": JostFamily(SolitonConfig("one_line", (-0.5, 2.5), pair=(1, 2))),
        "flat": JostFamily(SolitonConfig("vacuum", ())),
    }


def sample_points(seed=0, n=24, lo=-2.5, hi=2.5):
    rng = np.random.default_rng(seed)
    return rng.uniform(lo, hi, (3, n))


# ----- wave structure -----


def test_wave_is_shifted_tau_quotient():
    """wave * tau = plane wave times the slope-shifted minor expansion."""
    fam = families()["one"]
    k = 0.37
    x, y, t = sample_points(1)
    kap = (-1.0, 1.0)
    th1 = theta_eval(kap, 1, x, y, t)
    th2 = theta_eval(kap, 2, x, y, t)
    w = 1j * k
    plane = np.exp(w * x + w * w * y - w ** 3 * t)
    expected = plane * ((w - kap[0]) * np.exp(th1) + (w - kap[1]) * np.exp(th2))
    got = fam.phi(k=k).eval(x, y, t) * fam.tau.eval(x, y, t)
    assert np.max(np.abs(got - expected)) < 1e-12 * np.max(np.abs(expected))


def test_dual_wave_inverts_slope_factors():
    fam = families()["one"]
    k = 0.37
    x, y, t = sample_points(2)
    kap = (-1.0, 1.0)
    th1 = theta_eval(kap, 1, x, y, t)
    th2 = theta_eval(kap, 2, x, y, t)
    w = 1j * k
    plane = np.exp(-(w * x + w * w * y - w ** 3 * t))
    expected = plane * (np.exp(th1) / (w - kap[0]) + np.exp(th2) / (w - kap[1]))
    got = fam.phi_star(k=k).eval(x, y, t) * fam.tau.eval(x, y, t)
    assert np.max(np.abs(got - expected)) < 1e-12 * np.max(np.abs(expected))


def test_dual_wave_pole_at_phase_slope():
    fam = families()["one"]
    with pytest.raises(PoleAtKappa):
        fam.phi_star(beta=1.0)


def test_wave_needs_exactly_one_parameter():
    fam = families()["flat"]
    with pytest.raises(ValueError):
        fam.phi()
    with pytest.raises(ValueError):
        fam.phi(k=0.3, beta=1.2)


# ----- annihilation by the compatibility operators -----

INSTANCES = [
    ("p", dict(k=0.37)),
    ("p", dict(beta=1.9)),
    ("p", dict(beta=-0.8 + 0.6j)),
    ("o", dict(k=0.2)),
    ("o", dict(beta=-1.5)),
    ("o", dict(beta=0.9 + 0.3j)),
    ("one", dict(k=0.5)),
    ("one", dict(beta=0.3)),
    ("one", dict(beta=1.4 - 0.7j)),
    ("narrow", dict(beta=1.0 + 0.2j)),
    ("flat", dict(k=0.11)),
    ("flat", dict(beta=0.77)),
]


@pytest.mark.parametrize("name,kw", INSTANCES)
def test_operators_annihilate_waves(name, kw):
    fam = families()[name]
    x, y, t = sample_points(3)
    wave = fam.phi(**kw)
    dual = fam.phi_star(**kw)
    for kind, fn in (("L", wave), ("B", wave), ("Lstar", dual), ("Bstar", dual)):
        res, scale = fam.lax_residual(kind, fn, x, y, t)
        assert np.max(res / scale) < 1e-9, (name, kw, kind)


# ----- discrete waves and completeness -----


def test_discrete_wave_pairings():
    """Crossing-channel family: waves at the phase slopes pair up."""
    fam = families()["p"]
    x, y, t = sample_points(4, n=12)
    pr = {j: fam.phi_residue(j).eval(x, y, t) for j in (1, 2, 3, 4)}
    ps = {j: fam.phi_star_residue(j).eval(x, y, t) for j in (1, 2, 3, 4)}
    scale = max(np.max(np.abs(pr[j])) for j in pr)
    assert np.max(np.abs(pr[1] - pr[4])) < 1e-12 * scale
    assert np.max(np.abs(pr[2] + pr[3])) < 1e-12 * scale
    dscale = max(np.max(np.abs(ps[j])) for j in ps)
    assert np.max(np.abs(ps[1] + ps[4])) < 1e-12 * dscale
    assert np.max(np.abs(ps[2] - ps[3])) < 1e-12 * dscale


def test_discrete_dual_closed_forms():
    """Dual residues reduce to single minor combinations over tau."""
    fam = families()["p"]
    x, y, t = sample_points(5, n=12)
    tau = fam.tau.eval(x, y, t)
    th = {m: theta_eval(KP, m, x, y, t) for m in (1, 2, 3, 4)}
    f1 = np.exp(th[2]) + np.exp(th[3])
    f2 = np.exp(th[4]) - np.exp(th[1])
    pairs = [(1, -f1), (4, f1), (2, -f2), (3, -f2)]
    for j, num in pairs:
        got = fam.phi_star_residue(j).eval(x, y, t)
        expected = num / tau
        assert np.max(np.abs(got - expected)) < 1e-12 * np.max(np.abs(expected)), j


def test_one_line_dual_residue_is_inverse_tau():
    fam = families()["one"]
    x, y, t = sample_points(6, n=12)
    tau = fam.tau.eval(x, y, t)
    for j in (1, 2):
        got = fam.phi_star_residue(j).eval(x, y, t)
        assert np.max(np.abs(got * tau - 1.0)) < 1e-12


@pytest.mark.parametrize("name", ["p", "o", "one"])
def test_completeness_at_independent_points(name):
    fam = families()[name]
    rng = np.random.default_rng(7)
    x, y, t = rng.uniform(-2.0, 2.0, (3, 20))
    xp, yp, tp = rng.uniform(-2.0, 2.0, (3, 20))
    total, scale = fam.completeness_sum(x, y, t, xp, yp, tp)
    assert np.max(total / scale) < 1e-10


# ----- product solution maps -----


@pytest.mark.parametrize("name,kw", [
    ("p", dict(k=0.43)),
    ("p", dict(beta=0.9 + 0.4j)),
    ("o", dict(k=0.31)),
    ("one", dict(beta=1.6)),
])
def test_wave_product_solution_maps(name, kw):
    fam = families()[name]
    x, y, t = sample_points(8, n=16, lo=-2.0, hi=2.0)
    out = product_residuals(fam, x, y, t, **kw)
    assert out["primitive"] < 1e-9
    assert out["product"] < 1e-9
    assert out["derivative"] < 1e-9


# ----- resolvent kernels -----


@pytest.mark.parametrize("level", [0, 1])
@pytest.mark.parametrize("eta", [0.35, 1.2])
def test_green_kernel_checks(level, eta):
    out = green_kernel_checks(KP, level, eta, seed=3)
    for key, val in out.items():
        assert val < 1e-11, (level, eta, key, val)


def test_green_kernel_level_is_validated():
    with pytest.raises(ValueError):
        green_kernel_checks(KP, 2, 0.3)
