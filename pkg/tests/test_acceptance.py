"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import json

import numpy as np
import pytest

from kdvbalance import thresholds
from kdvbalance.cli import main
from kdvbalance.dynamics import Params, SolverConfig, advance, simulate, solitary_wave
from kdvbalance.experiments import (
    epsilon_sweep,
    fit_loglog_slope,
    invariant_drift,
    time_uniformity,
)
from kdvbalance.flow import ColumnKind, column_integral
from kdvbalance.grid import l2_norm, make_grid
from kdvbalance.laws import (
    APPROXIMATE_LAWS,
    EXACT_LAWS,
    LawId,
    density,
    flux,
    law_form,
    residual,
    residual_closed_form,
)
from kdvbalance.profiles import GaussianProfile, Sech2Profile, SolitaryProfile

# first validated run of the Gaussian Energy uniformity study (4096 points, L = 400)
GAUSSIAN_ENERGY_RATIO_GOLDEN = 1.0107141519402276


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} :: {detail}")
        assert ok, detail

    return emit


def test_criterion_1_exact_identity_discriminator(report):
    g = make_grid(1024, 100.0)
    p = Params(0.1)
    profiles = {
        "solitary": SolitaryProfile(1.0).build(g, p),
        "gaussian": GaussianProfile(1.0, 5.0).build(g, p),
    }
    worst_exact, least_approx = 0.0, np.inf
    for eta in profiles.values():
        for law in EXACT_LAWS:
            worst_exact = max(worst_exact, l2_norm(residual(law, eta, p)))
        for law in APPROXIMATE_LAWS:
            least_approx = min(least_approx, l2_norm(residual(law, eta, p)))
    ok = worst_exact <= 1e-9 and least_approx >= 1e-5
    report(1, "exact vs approximate balance", ok,
           f"max exact residual {worst_exact:.3e} (<= 1e-9), "
           f"min approximate residual {least_approx:.3e} (>= 1e-5)")


def test_criterion_2_closed_form_equivalence(report):
    g = make_grid(1024, 100.0)
    p = Params(0.1)
    profiles = [
        SolitaryProfile(1.0),
        SolitaryProfile(0.5, x0=45.0),
        GaussianProfile(0.3, 5.0),
        GaussianProfile(1.0, 4.0),
        Sech2Profile(0.5, 0.8),
    ]
    worst = 0.0
    for prof in profiles:
        eta = prof.build(g, p)
        for law in APPROXIMATE_LAWS:
            closed = residual_closed_form(law, eta, p)
            rel = l2_norm(residual(law, eta, p) - closed) / l2_norm(closed)
            worst = max(worst, rel)
    report(2, "numerical residual vs closed form", worst <= 1e-8,
           f"max relative L2 difference {worst:.3e} over 5 profiles (<= 1e-8)")


def test_criterion_3_epsilon_squared_scaling(report):
    details, ok = [], True
    prof = Sech2Profile(0.5, 0.8)
    for law, window in ((LawId.MOMENTUM, thresholds.SLOPE_WINDOW_TIGHT),
                        (LawId.ENERGY, thresholds.SLOPE_WINDOW_TIGHT),
                        (LawId.ENERGY_STAR, thresholds.SLOPE_WINDOW)):
        res = epsilon_sweep(prof, law)
        good = window[0] <= res.slope <= window[1]
        ok &= good
        details.append(f"{law.value} analysis {res.slope:.4f}")
    # dynamic mode on a wide box so the dispersive tail never reaches the edges
    wide = make_grid(4096, 400.0)
    for law in APPROXIMATE_LAWS:
        res = epsilon_sweep(GaussianProfile(1.0, 5.0), law, grid=wide, mode="dynamic",
                            sample_times=(0.0, 5.0, 10.0))
        lo, hi = thresholds.SLOPE_WINDOW
        good = res.complete and all(s is not None and lo <= s <= hi for s in res.slopes_by_time)
        ok &= good
        details.append(f"{law.value} dynamic " + "/".join(f"{s:.3f}" for s in res.slopes_by_time))
    report(3, "eps^2 scaling slopes", ok, "; ".join(details))


def test_criterion_4_time_uniformity(report):
    p = Params(0.1)
    sol = time_uniformity(SolitaryProfile(1.0, x0=25.0), "Momentum", p, 50.0)
    gau = time_uniformity(GaussianProfile(0.3, 5.0), "Energy", p, 20.0,
                          grid=make_grid(4096, 400.0))
    rate = gau.growth_rate()
    golden_ok = gau.ratio == pytest.approx(GAUSSIAN_ENERGY_RATIO_GOLDEN, rel=1e-8)
    ok = (sol.ratio <= thresholds.UNIFORMITY_RATIO and rate <= thresholds.GROWTH_RATE
          and golden_ok)
    report(4, "residual bounded in time", ok,
           f"solitary Momentum ratio {sol.ratio:.6f} (<= 1.2); Gaussian Energy growth "
           f"{rate:.3e}/unit time (<= 1e-3), ratio {gau.ratio:.10f} (golden "
           f"{GAUSSIAN_ENERGY_RATIO_GOLDEN:.10f})")


def test_criterion_5_invariant_conservation(report):
    g = make_grid(1024, 100.0)
    p = Params(0.1)
    eta0 = solitary_wave(1.0, p, 25.0, 0.0, g)
    traj = simulate(eta0, SolverConfig(p, g, dt=0.005, t_end=50.0, snapshot_stride=100))
    rep = invariant_drift(traj)
    ok = rep.passed(thresholds.DRIFT_TOLERANCE)
    report(5, "invariant drift over t in [0, 50]", ok,
           "max relative drift m1/m2/m3 = " + ", ".join(f"{d:.2e}" for d in rep.max_rel_drift))


def _solitary_error(dt):
    g = make_grid(1024, 100.0)
    p = Params(0.1)
    eta0 = solitary_wave(1.0, p, 40.0, 0.0, g)
    out = advance(eta0, SolverConfig(p, g, dt=dt), int(round(10.0 / dt)))
    return float(np.max(np.abs(out.values - solitary_wave(1.0, p, 40.0, 10.0, g).values)))


def test_criterion_6_solitary_fidelity(report):
    err = _solitary_error(0.005)
    errs = [_solitary_error(dt) for dt in (0.008, 0.004, 0.002)]
    order = min(np.log2(errs[i] / errs[i + 1]) for i in range(2))
    ok = err <= 1e-6 and order >= 3.8
    report(6, "solitary wave fidelity", ok,
           f"Linf error at t=10 {err:.3e} (<= 1e-6); observed order {order:.3f} (>= 3.8)")


def test_criterion_7_column_integrals(report):
    g = make_grid(1024, 100.0)
    printed = {
        ColumnKind.MOMENTUM: lambda e, p: density("Momentum", e, p),
        ColumnKind.FLOW_FORCE: lambda e, p: flux("Momentum", e, p),
        ColumnKind.ENERGY: lambda e, p: density("Energy", e, p),
        ColumnKind.ENERGY_FLUX: lambda e, p: flux("Energy", e, p),
    }
    details, ok = [], True
    for prof in (SolitaryProfile(1.0), GaussianProfile(1.0, 5.0)):
        for kind, formula in printed.items():
            pts = []
            for eps in (0.05, 0.1, 0.2):
                p = Params(eps)
                eta = prof.build(g, p)
                pts.append((eps, l2_norm(column_integral(kind, eta, p) - formula(eta, p))))
            slope = fit_loglog_slope(pts)[0]
            ok &= slope >= thresholds.COLUMN_SLOPE
            details.append(f"{prof.kind} {kind.value} {slope:.2f}")
    report(7, "column integrals vs printed formulas (slope >= 2.8)", ok, "; ".join(details))


def test_criterion_8_negative_controls(report, tmp_path):
    g = make_grid(1024, 100.0)
    p = Params(0.1)
    eta = solitary_wave(1.0, p, 50.0, 0.0, g)
    form = law_form(LawId.QUADRATIC)
    corrupted = [l2_norm(residual(form.with_flux_coefficient(i, 1.1), eta, p))
                 for i in range(len(form.flux))]
    corrupt_ok = min(corrupted) > 1e-4

    # under-resolved drift: 64 points across the box
    coarse = make_grid(64, 100.0)
    eta0 = solitary_wave(1.0, p, 25.0, 0.0, coarse, check_tail=False)
    cfg = SolverConfig(p, coarse, dt=0.005, t_end=50.0, snapshot_stride=500, tail_tolerance=None)
    drift_flagged = not invariant_drift(simulate(eta0, cfg)).passed()

    conf = tmp_path / "drift.json"
    conf.write_text(json.dumps({"command": "drift", "grid": {"n": 64, "length": 100.0},
                                "solver": {"t_end": 50.0}}))
    code = main(["drift", "--config", str(conf), "--output", str(tmp_path / "o"), "--quiet"])
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    cli_flagged = code != 0 and manifest["status"] != "pass"

    ok = corrupt_ok and drift_flagged and cli_flagged
    report(8, "negative controls", ok,
           f"min corrupted-flux residual {min(corrupted):.3e} (> 1e-4); under-resolved drift "
           f"flagged: {drift_flagged}; CLI drift exit {code} status {manifest['status']}")
