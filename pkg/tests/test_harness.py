import dataclasses
import json
import math

import numpy as np
import pytest

from landau_soft.coercivity import certificate_for_state
from landau_soft.grid import build_grid
from landau_soft.harness import (
    FAIL,
    PASS,
    UNMET,
    CheckReport,
    ConstantsLedger,
    HarnessError,
    TrapParameters,
    _jsonable,
    coulomb_check,
    coulomb_identity,
    derive_C1_C2,
    gronwall_check,
    growth_check,
    h1_integrability,
    local_estimate_check,
    mass_lower_bound,
    phi_schedule,
    time_derivative,
    weighted_trap_check,
)
from landau_soft.solver import LandauOperator, SolverConfig
from landau_soft.state import mixture, moments

CONFIG = SolverConfig(t_end=1e3, max_steps=20, output_stride=2)


@pytest.fixture(scope="module")
def bumps():
    g = build_grid(16, 5.0)
    return mixture(g, [(0.5, 0.5, (1.0, 0.0, 0.0)), (0.5, 0.5, (-1.0, 0.0, 0.0))])


@pytest.fixture(scope="module")
def traj(bumps):
    cache = {}

    def get(gamma):
        if gamma not in cache:
            cache[gamma] = LandauOperator(bumps.grid, gamma).simulate(bumps, CONFIG)
        return cache[gamma]

    return get


def test_ledger_provenance_and_lookup():
    led = ConstantsLedger.default()
    assert led.get("c_hardy") == 0.25 and "c_pitt" in led
    with pytest.raises(HarnessError):
        led.set("x", 1.0, "guessed")
    with pytest.raises(HarnessError):
        led.get("missing")
    led.set("y", -3.0, "fitted", log_space=True)
    assert led.to_dict()["y"] == {"value": -3.0, "provenance": "fitted", "log_space": True, "note": ""}


def test_jsonable_handles_nonfinite_and_numpy():
    out = _jsonable({"a": np.float64(np.nan), "b": [math.inf, -math.inf], "c": np.int64(3), "d": np.bool_(True)})
    assert out == {"a": "nan", "b": ["inf", "-inf"], "c": 3, "d": True}
    rep = CheckReport("x", PASS, {"v": np.float64(1.5)}, {"k": np.array([1.0, np.inf])})
    json.dumps(rep.to_dict(), allow_nan=False)


def test_time_derivative_exact_on_quadratics():
    t = np.array([0.0, 0.1, 0.3, 0.35, 0.8])
    assert np.allclose(time_derivative(t, t**2), 2 * t, atol=1e-12)
    assert np.allclose(time_derivative(t[:2], 3 * t[:2]), 3.0)


def test_regime_errors(traj):
    with pytest.raises(HarnessError, match="Theorem part 1"):
        derive_C1_C2(certificate_for_state(traj(-2.5).states[0], -2.5), 1.0, 1.0, -2.5)
    with pytest.raises(HarnessError, match="Theorem part 2"):
        weighted_trap_check(traj(-1.0), 0.5, ConstantsLedger.default())
    with pytest.raises(HarnessError, match="alpha"):
        weighted_trap_check(traj(-2.5), 2.0, ConstantsLedger.default())
    with pytest.raises(HarnessError):
        coulomb_check(traj(-2.5), 3.5, ConstantsLedger.default())
    with pytest.raises(HarnessError, match="local estimate"):
        local_estimate_check(traj(-1.0), ConstantsLedger.default())
    with pytest.raises(HarnessError, match="growth"):
        growth_check(traj(-2.5))


def test_gronwall_traced_and_fitted(traj):
    tr = traj(-1.0)
    q = moments(tr.states[0])
    cert = certificate_for_state(tr.states[0], -1.0)
    traced = derive_C1_C2(cert, q.mass, q.energy, -1.0)
    assert traced.mode == "traced" and len(traced.trace) >= 5
    rep = gronwall_check(tr, traced)
    assert rep.status == PASS and rep.details["margin_t0"] == 0.0
    fitted = derive_C1_C2(cert, q.mass, q.energy, -1.0, "fitted", trajectory=tr)
    rep = gronwall_check(tr, fitted)
    assert rep.status == PASS
    with pytest.raises(HarnessError):
        derive_C1_C2(cert, q.mass, q.energy, -1.0, "fitted")
    with pytest.raises(HarnessError):
        derive_C1_C2(cert, q.mass, q.energy, -1.0, "guess")


def test_trap_unmet_on_warm_data(traj):
    rep = weighted_trap_check(traj(-2.5), 2.75, ConstantsLedger.default())
    assert rep.status == UNMET and "smallness" in rep.details["reason"]
    assert rep.details["X0"] > rep.details["X_bar"]


def test_trap_fitted_lambda_makes_F_form_hold(traj):
    rep = weighted_trap_check(traj(-2.5), 2.75, ConstantsLedger.default(), TrapParameters(lambda_mode="fitted"))
    assert rep.details["max_residual_F"] <= 0.0
    assert rep.details["max_residual_differential_form"] <= 1e-9 * rep.details["Lambda"] * rep.details["sup_X"] + 1e-12


def _inflated(tr, factor):
    # a synthetic dissipation column large enough that the fitted C_I is positive
    rows = [dict(r, h1_weighted=r["h1_weighted"] * factor) for r in tr.rows]
    return dataclasses.replace(tr, rows=rows)


def test_trap_smallness_threshold_shrinks_with_delta(traj):
    tr = _inflated(traj(-2.5), 100.0)
    C = float(np.min(tr.column("coer_min_ratio")))
    xt = []
    for frac in (0.1, 0.5, 0.9, 0.999):
        rep = weighted_trap_check(tr, 2.75, ConstantsLedger.default(), TrapParameters(delta=frac * C))
        assert rep.details["C_I"] > 0
        assert rep.details["max_residual_differential_form"] <= 1e-9 * abs(rep.details["Lambda"]) * rep.details["sup_X"] + 1e-9
        xt.append(rep.details["X_tilde"])
    assert all(a > b for a, b in zip(xt, xt[1:]))
    assert xt[-1] < 1e-6 * xt[0]
    with pytest.raises(HarnessError):
        weighted_trap_check(tr, 2.75, ConstantsLedger.default(), TrapParameters(delta=1.5 * C))


def test_coulomb_identity_and_check(traj):
    tr = traj(-3.0)
    ident = coulomb_identity(tr.states[-1], 3.5)
    assert ident["rel_diff"] <= 1e-12
    rep = coulomb_check(tr, 3.5, ConstantsLedger.default())
    assert rep.details["II_max_rel_diff"] <= 1e-10
    assert rep.status in (PASS, UNMET, FAIL)
    assert len(rep.curves["II"]) == len(tr.rows)


def test_certified_source_needs_certificate(traj):
    with pytest.raises(HarnessError):
        weighted_trap_check(traj(-2.5), 2.75, ConstantsLedger.default(), TrapParameters(coer_source="certified"))


def test_mass_lower_bound_chain_holds(bumps):
    lb = mass_lower_bound(bumps, 2.75, -2.5)
    g = bumps.grid
    w = g.bracket**2.75 * bumps.values
    A = math.sqrt(np.sum(g.bracket**-2.5 * w * w / g.speed2) * g.cell_volume)
    assert 0.0 < lb["A_low"] <= A


def test_phi_schedule():
    assert phi_schedule(0.0, 0.1, -2.5) == pytest.approx(0.1**2)
    t = np.array([0.0, 1.0, 3.0])
    assert np.allclose(phi_schedule(t, 0.1, -2.5), 0.01 * (1 + t) ** (-2.0 / 3.0))


def test_local_estimate_growth_and_h1(traj):
    rep = local_estimate_check(traj(-2.5), ConstantsLedger.default())
    assert rep.status == PASS and rep.details["max_residual_l5"] <= 0.0
    g = growth_check(traj(-1.0))
    assert g.status == PASS and g.details["mu"] == pytest.approx(16.0 / 3.0)
    h = h1_integrability(traj(-1.0))
    assert h.status == PASS and h.details["integral"] > 0
    blown = dataclasses.replace(traj(-1.0), blowup=True)
    assert h1_integrability(blown).status == FAIL
