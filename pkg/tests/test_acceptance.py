"""Acceptance criteria 1-11, each at its stated tolerance.

Every test records one ``CRITERION k: PASS|FAIL`` line, printed immediately
and again in the terminal summary.
"""

import dataclasses
import math

import mpmath
import numpy as np
import pytest
from conftest import ACCEPTANCE_LINES

from landau_soft.bench import (
    HOMOGENEITY_TOL,
    PARSEVAL_TOL,
    TestFunctionFamily,
    cubic_interpolation_check,
    hardy_family_check,
    mass_lower_bound_check,
    parseval_family_check,
)
from landau_soft.cli import main
from landau_soft.coercivity import certificate_for_state, coercivity_constant
from landau_soft.grid import build_grid, convolve, convolve_direct, integrate
from landau_soft.harness import (
    PASS,
    ConstantsLedger,
    TrapParameters,
    coulomb_check,
    derive_C1_C2,
    gronwall_check,
    growth_check,
    h1_integrability,
    local_estimate_check,
    weighted_trap_check,
)
from landau_soft.solver import LandauOperator, growth_moment_order
from landau_soft.state import maxwellian, moments

GAMMAS = (-1.0, -2.0, -2.5, -3.0)

# largest entropy increase between outputs accepted as round-off: the
# Maxwellian equilibrium runs drift by at most 2e-7 per output
ENTROPY_TOL = 1e-6


def record(k, ok, detail=""):
    line = f"CRITERION {k}: {'PASS' if ok else 'FAIL'} {detail}".rstrip()
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_criterion_01_convolution_oracle():
    g = build_grid(8, 3.0, check_min_size=False)
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(20):
        field = rng.normal(size=g.shape)
        kernel = rng.normal(size=g.offset_shape)
        fast = convolve(g, field, kernel)
        slow = convolve_direct(g, field, kernel)
        worst = max(worst, float(np.abs(fast - slow).max() / np.abs(slow).max()))
    assert record(1, worst <= 1e-10, f"max relative error {worst:.2e} (tol 1e-10)")


def test_criterion_02_conservation_and_entropy(trajectories):
    worst_drift, worst_dH = 0.0, -math.inf
    for gam in GAMMAS:
        tr = trajectories(gam)
        m = tr.column("mass")
        e = tr.column("energy")
        p = np.stack([tr.column(c) for c in ("px", "py", "pz")])
        drift = max(
            float(np.abs(m / m[0] - 1.0).max()),
            float(np.abs(e / e[0] - 1.0).max()),
            float(np.abs(p - p[:, :1]).max() / m[0]),
        )
        worst_drift = max(worst_drift, drift)
        worst_dH = max(worst_dH, float(np.diff(tr.column("entropy")).max()))
    ok = worst_drift <= 1e-12 and worst_dH <= ENTROPY_TOL
    assert record(2, ok, f"max moment drift {worst_drift:.2e} (tol 1e-12), max entropy increase {worst_dH:.2e}")


def test_criterion_03_equilibrium_refinement():
    ratios = {}
    for gam in GAMMAS:
        norms = []
        for n in (16, 32):
            st = maxwellian(build_grid(n, 6.0), 1.0, 1.0)
            Q = LandauOperator(st.grid, gam).Q(st)
            norms.append(math.sqrt(integrate(st.grid, Q * Q)))
        ratios[gam] = norms[0] / norms[1]
    ok = min(ratios.values()) >= 3.5
    assert record(3, ok, "ratios " + ", ".join(f"{g:g}: {r:.2f}" for g, r in ratios.items()) + " (need >= 3.5)")


def test_criterion_04_coercivity_certificate(trajectories, cold_trajectories):
    worst_gap = math.inf
    trajs = [trajectories(g) for g in GAMMAS] + [cold_trajectories(g) for g in (-2.5, -3.0)]
    for tr in trajs:
        cert = certificate_for_state(tr.states[0], tr.gamma)
        logs = np.log(tr.column("coer_min_ratio"))
        worst_gap = min(worst_gap, float(np.min(logs - cert.log_C_coer)))
    cert = coercivity_constant(1.0, 1.5, -4.25681, -1.0)
    mpmath.mp.dps = 40
    Ht = mpmath.mpf(-4.25681) + 2 + 3 + 3 * (2 * mpmath.pi) ** 3 * mpmath.e
    eta4 = mpmath.log(mpmath.mpf(1) / 8) - 2 * Ht / (mpmath.mpf(1) / 4)
    eta8 = mpmath.log(mpmath.mpf(1) / 16) - 2 * Ht / (mpmath.mpf(1) / 8)
    exact_R = cert.R_star == 2.0 * math.sqrt(1.5 / 1.0)
    eta_ok = abs(cert.log_eta_quarter - float(eta4)) <= 1e-9 * abs(float(eta4)) and abs(
        cert.log_eta_eighth - float(eta8)
    ) <= 1e-9 * abs(float(eta8))
    ok = worst_gap >= 0.0 and exact_R and eta_ok
    assert record(4, ok, f"min log(ratio) - log C_coer = {worst_gap:.4g}, R*={cert.R_star!r}, log eta closed form {eta_ok}")


def test_criterion_05_gronwall_traced(trajectories):
    details = []
    ok = True
    for gam in (-1.0, -2.0):
        tr = trajectories(gam)
        q = moments(tr.states[0])
        cert = certificate_for_state(tr.states[0], gam)
        consts = derive_C1_C2(cert, q.mass, q.energy, gam, "traced")
        rep = gronwall_check(tr, consts)
        ok &= rep.status == PASS and rep.details["margin_t0"] == 0.0
        details.append(f"gamma={gam:g}: {rep.status}, margin(0)={rep.details['margin_t0']}")
    assert record(5, ok, "; ".join(details))


def test_criterion_06_trap(cold_trajectories):
    params = TrapParameters(epsilon=10.0)
    rep25 = weighted_trap_check(cold_trajectories(-2.5), 2.75, ConstantsLedger.default(), params)
    rep3 = coulomb_check(cold_trajectories(-3.0), 3.5, ConstantsLedger.default(), params)
    ok = True
    parts = []
    for rep in (rep25, rep3):
        d = rep.details
        smallness = d["X0"] <= d["X_bar"]
        bounded = d["sup_X"] <= d["X_bar"] * (1.0 + 1e-3)
        ok &= smallness and bounded and rep.status == PASS
        parts.append(f"{rep.name}: X0={d['X0']:.4g} <= Xbar={d['X_bar']:.4g}, sup X={d['sup_X']:.4g}")
    ident = rep3.details["II_max_rel_diff"]
    ok &= ident <= 1e-10
    assert record(6, ok, "; ".join(parts) + f"; II identity {ident:.1e}")


def _halved(tr):
    return dataclasses.replace(tr, rows=tr.rows[::2], states=tr.states[::2])


def test_criterion_07_h1_integrability(trajectories):
    worst = 0.0
    ok = True
    for gam in GAMMAS:
        tr = trajectories(gam)
        assert (len(tr.rows) - 1) % 2 == 0
        full = h1_integrability(tr)
        half = h1_integrability(_halved(tr))
        ok &= full.status == PASS and math.isfinite(full.details["integral"])
        worst = max(worst, abs(half.details["integral"] / full.details["integral"] - 1.0))
    ok &= worst <= 0.01
    assert record(7, ok, f"all integrals finite, max stride-halving change {worst:.2e} (tol 1e-2)")


def test_criterion_08_local_estimate(trajectories):
    rep = local_estimate_check(trajectories(-2.5), ConstantsLedger.default())
    d = rep.details
    ok = rep.status == PASS and d["loglog_slope_M"] <= 1.1 and d["max_residual_l5"] <= 0.0
    assert record(8, ok, f"slope {d['loglog_slope_M']:.3g} (<= 1.1), max residual {d['max_residual_l5']:.3g}")


def test_criterion_09_growth(trajectories):
    rep = growth_check(trajectories(-1.0))
    mu = growth_moment_order(-1.0)
    ok = rep.status == PASS and rep.details["loglog_slope"] <= 2.1 and abs(mu - 16.0 / 3.0) <= 1e-15
    assert record(9, ok, f"slope {rep.details['loglog_slope']:.3g} (<= 2.1), mu = {mu!r}")


def test_criterion_10_inequality_bench():
    fam = TestFunctionFamily(seed=0, count=100)
    states = list(fam.members())
    hardy = hardy_family_check(fam, -2.5, 2.75)
    pars = parseval_family_check(fam)
    chain = mass_lower_bound_check(states, 2.75, -2.5)
    cubic_w = cubic_interpolation_check(states, 2.75, -2.5, "weighted")
    cubic_l = cubic_interpolation_check(states, 2.75, -2.5, "local")
    hom = max(
        chain.details["homogeneity_max_error"],
        cubic_w.details["homogeneity_max_error"],
        cubic_l.details["homogeneity_max_error"],
    )
    ok = (
        hardy.status == PASS
        and hardy.details["ratio"]["min"] >= 0.25
        and pars.details["defect"]["max"] <= PARSEVAL_TOL
        and chain.details["min_chain_slack"] >= 0.0
        and hom <= HOMOGENEITY_TOL
    )
    assert record(
        10,
        ok,
        f"Hardy min ratio {hardy.details['ratio']['min']:.4g}, Parseval {pars.details['defect']['max']:.1e}, "
        f"chain slack {chain.details['min_chain_slack']:.3g}, homogeneity {hom:.1e}",
    )


@pytest.fixture
def verify_config(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "gamma = -1\ngrid.n = 16\ngrid.L = 5\ninitial.kind = two_maxwellians\n"
        "initial.temperature = 0.5\nsolver.max_steps = 6\nsolver.output_stride = 2\n"
    )
    return cfg


def test_criterion_11_determinism(tmp_path, verify_config, monkeypatch):
    outs = []
    for i, threads in enumerate(("1", "1", "2")):
        monkeypatch.setenv("LANDAU_SOFT_THREADS", threads)
        d = tmp_path / f"run{i}"
        code = main(["verify", str(verify_config), "--out-dir", str(d)])
        outs.append((code, (d / "timeseries.csv").read_bytes(), (d / "report.json").read_bytes()))
    ok = outs[0] == outs[1] == outs[2] and outs[0][0] == 0
    assert record(11, ok, "CSV and JSON byte-identical across repeats and thread counts")
