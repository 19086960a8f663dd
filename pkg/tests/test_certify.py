import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import cKDTree

from neumann_cert import certify as ce
from neumann_cert import closed_form as cf


def test_zone_table():
    I, II, III = ce.zones()
    assert (I.a_min, I.a_max, I.c_min, I.c_max, I.n_a, I.n_c, I.k) == (1 / 60, 0.06, 0.16, 0.5, 155, 150, 0.0)
    assert (II.a_min, II.a_max, II.n_a, II.n_c, II.k) == (0.06, 0.12, 160, 155, 0.06)
    assert (III.a_min, III.a_max, III.n_a, III.n_c, III.k) == (0.12, 0.25, 730, 735, 0.12)
    assert III.diagonal_cut and not I.diagonal_cut
    with pytest.raises(KeyError):
        ce.get_zone("IV")


def test_grid_sizes():
    a, c = ce.build_grid(ce.get_zone("I"))
    assert len(a) == 156 * 151
    total = sum(len(ce.build_grid(z)[0]) for z in ce.zones())
    assert abs(total - 530_000) <= 0.02 * 530_000


@pytest.mark.parametrize("name", ["I", "II", "III"])
def test_grid_is_sorted_inside_and_unique(name):
    z = ce.get_zone(name)
    a, c = ce.build_grid(z)
    assert np.all(z.contains(a, c))
    order = np.lexsort((c, a))
    assert np.array_equal(order, np.arange(len(a)))
    assert len(np.unique(np.column_stack([a, c]), axis=0)) == len(a)


@pytest.mark.parametrize("name", ["I", "II", "III"])
def test_grid_coverage(name):
    z = ce.get_zone(name)
    a, c = ce.build_grid(z)
    rng = np.random.default_rng(31)
    pa = rng.uniform(z.a_min, z.a_max, 400_000)
    pc = rng.uniform(z.c_min, z.c_max, 400_000)
    keep = z.contains(pa, pc)
    pa, pc = pa[keep][:100_000], pc[keep][:100_000]
    tree = cKDTree(np.column_stack([a / z.delta_a, c / z.delta_c]))
    dist, _ = tree.query(np.column_stack([pa / z.delta_a, pc / z.delta_c]), p=np.inf)
    assert dist.max() <= 0.5 + 1e-12


def test_diagonal_refinement_points():
    z = ce.get_zone("III")
    a, c = ce.build_grid(z)
    ia = (a - z.a_min) / z.delta_a
    ic = (c - z.c_min) / z.delta_c
    half = (np.abs(ia * 2 - np.round(ia * 2)) < 1e-6) & (np.abs(ic * 2 - np.round(ic * 2)) < 1e-6)
    assert np.all(half)
    off = (np.abs(ia - np.round(ia)) > 1e-6) | (np.abs(ic - np.round(ic)) > 1e-6)
    assert off.sum() > 0
    # every refinement point sits in a cell crossed by c = a
    assert np.all(np.abs(a[off] - c[off]) <= z.delta_a + z.delta_c)


def test_budget_arithmetic():
    z = ce.get_zone("I")
    la, lc = ce.REFERENCE_LIPSCHITZ["I"]
    assert z.delta_a == pytest.approx((0.06 - 1 / 60) / 155, rel=1e-15)
    assert z.delta_c == pytest.approx(0.34 / 150, rel=1e-15)
    assert la * z.delta_a / 2 + lc * z.delta_c / 2 == pytest.approx(0.21032, abs=1e-4)


def test_reference_sweeps(zone_runs):
    expected = {"I": (-0.21184, 0.21032), "II": (-0.39006, 0.38422), "III": (-0.20324, 0.202)}
    for name, (rep, (a, c, F)) in zone_runs.items():
        mx, budget = expected[name]
        assert rep.max_F == pytest.approx(mx, abs=5e-4)
        assert rep.error_budget == pytest.approx(budget, abs=1e-3)
        assert rep.verdict and rep.certified_upper < 0
        assert rep.certified_upper == rep.max_F + rep.error_budget + rep.fp_slack
        assert rep.error_budget == rep.lip_a * rep.delta_a / 2 + rep.lip_c * rep.delta_c / 2
        assert rep.points_evaluated == len(F)
        i = int(np.argmax(F))
        assert rep.argmax == (a[i], c[i]) and F[i] == rep.max_F
        assert np.array_equal(F, cf.F(rep.k, a, c))


def test_argmax_tie_break(monkeypatch):
    monkeypatch.setattr(ce, "evaluate_grid", lambda k, a, c, workers=1: np.full(len(a), -1.0))
    rep = ce.sweep(ce.get_zone("I"))
    assert rep.argmax == (1 / 60, 0.16)


def test_nonfinite_values_abort(monkeypatch):
    def bad(k, a, c, workers=1):
        F = np.full(len(a), -1.0)
        F[7] = np.nan
        return F

    monkeypatch.setattr(ce, "evaluate_grid", bad)
    with pytest.raises(ce.NonFiniteError) as exc:
        ce.sweep(ce.get_zone("II"))
    assert exc.value.zone == "II"


def test_determinism_across_workers(zone_runs):
    z = ce.get_zone("I")
    base, (_, _, F1) = zone_runs["I"]
    for w in (4, 16):
        rep, (_, _, Fw) = ce.sweep(z, workers=w, return_values=True)
        assert np.array_equal(F1, Fw)
        assert (rep.max_F, rep.argmax, rep.certified_upper) == (base.max_F, base.argmax, base.certified_upper)


def test_sabotage_flips_verdict():
    flipped = []
    for z in ce.zones():
        la, lc = ce.REFERENCE_LIPSCHITZ[z.name]
        rep = ce.sweep(z, lip_override=(10 * la, 10 * lc))
        flipped.append(not rep.verdict)
    assert any(flipped)


@settings(max_examples=5, deadline=None)
@given(st.floats(1.0, 3.0), st.floats(1.0, 3.0))
def test_larger_constants_never_help(fa, fc):
    z = ce.get_zone("I")
    la, lc = ce.REFERENCE_LIPSCHITZ["I"]
    base = ce.sweep(z)
    big = ce.sweep(z, lip_override=(fa * la, fc * lc))
    assert big.certified_upper >= base.certified_upper
    assert big.verdict <= base.verdict


def test_computed_constants_give_same_verdicts(zone_runs):
    for z in ce.zones():
        rep = ce.sweep(z, lip_source="computed")
        assert rep.verdict == zone_runs[z.name][0].verdict
        assert rep.lip_source == "computed"


def test_unknown_lip_source():
    with pytest.raises(ValueError):
        ce.sweep(ce.get_zone("I"), lip_source="guess")


def test_lipschitz_c_constants(lipschitz_reports):
    for name, rep in lipschitz_reports.items():
        ref_c = ce.REFERENCE_LIPSCHITZ[name][1]
        assert abs(rep.lip_c - ref_c) <= 0.02 * ref_c
        assert rep.lip_a == max(abs(x) for x in rep.da_interval)
        assert rep.lip_c == max(abs(x) for x in rep.dc_interval)


def test_lipschitz_dominates_finite_differences(lipschitz_reports, fd_audits):
    for name, rep in lipschitz_reports.items():
        audit = fd_audits[name]
        assert audit["points"] == 10_000
        assert audit["max_abs_dF_da"] <= rep.lip_a
        assert audit["max_abs_dF_dc"] <= rep.lip_c


def test_perimeter_derivatives():
    rng = np.random.default_rng(32)
    h = 1e-7
    for _ in range(50):
        a = rng.uniform(0.02, 0.25)
        c = rng.uniform(a, 0.5)
        fd_a = (cf.ptilde(a + h, c) - cf.ptilde(a - h, c)) / (2 * h)
        fd_c = (cf.ptilde(a, c + h) - cf.ptilde(a, c - h)) / (2 * h)
        assert ce.dP_da(a, c) == pytest.approx(float(fd_a), rel=1e-6, abs=1e-7)
        assert ce.dP_dc(a) == pytest.approx(float(fd_c), rel=1e-6, abs=1e-7)


def test_default_workers(monkeypatch):
    monkeypatch.delenv("NEUMANN_CERT_WORKERS", raising=False)
    assert ce.default_workers() == 1
    monkeypatch.setenv("NEUMANN_CERT_WORKERS", "3")
    assert ce.default_workers() == 3
    for bad in ("x", "0"):
        monkeypatch.setenv("NEUMANN_CERT_WORKERS", bad)
        with pytest.raises(ValueError):
            ce.default_workers()


def test_small_a_certificate():
    cert = ce.small_a_certificate(samples=10_000)
    assert cert.verdict
    assert ce.C0_SWITCH == pytest.approx(0.3342, abs=1e-4)
    assert ce.C0_SWITCH == (118 - math.sqrt(3422)) / 178
    assert cf.f1(0.5) + cf.f2(1 / 60, 0.5) / 60 < 0
    for name, chk in cert.checks.items():
        if isinstance(chk, dict) and "max" in chk:
            assert chk["max_with_continuity"] < 0, name


def test_full_verdict_single_zone():
    seen = []
    out = ce.full_verdict(zone_names=["I"], on_zone=lambda rep, v: seen.append((rep.zone, len(v[0]))))
    assert out["overall_verdict"]
    assert out["zone_selection"] == ["I"] and seen == [("I", 23_556)]
    assert out["small_a"]["verdict"] and out["midrange"]["verdict"]
