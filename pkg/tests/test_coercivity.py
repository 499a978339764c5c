import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from landau_soft.coercivity import (
    ENTROPY_TAIL_CONSTANT,
    CoercivityError,
    certificate_for_state,
    coercivity_constant,
    entropy_majorant,
    entropy_majorant_slack,
    hypotheses_hold,
    small_set_chain,
    small_set_eta,
    verify_coercivity,
)
from landau_soft.grid import build_grid
from landau_soft.state import maxwellian, mixture


def test_entropy_tail_constant_against_mpmath():
    mpmath.mp.dps = 30
    assert ENTROPY_TAIL_CONSTANT == pytest.approx(float(3 * (2 * mpmath.pi) ** 3 * mpmath.e), rel=1e-15)


def test_reference_values():
    cert = coercivity_constant(1.0, 1.5, -4.25681, -1.0)
    assert cert.H_tilde == pytest.approx(2023.48, abs=0.1)
    assert cert.R_star == 2.0 * math.sqrt(1.5)
    assert small_set_eta(0.25, 2023.48) == pytest.approx(-16190.0, abs=0.5)
    assert cert.C_coer == 0.0 and cert.log_C_coer < -1e4


def test_small_set_eta_closed_form_mpmath():
    mpmath.mp.dps = 40
    for eps, Ht in [(0.25, 10.0), (0.125, 2023.48), (1.0, 0.5)]:
        exact = mpmath.log(mpmath.mpf(eps) / 2) - 2 * mpmath.mpf(Ht) / mpmath.mpf(eps)
        assert small_set_eta(eps, Ht) == pytest.approx(float(exact), rel=1e-14)


def test_input_validation():
    with pytest.raises(CoercivityError):
        coercivity_constant(1.0, 1.5, 0.0, -3.5)
    with pytest.raises(CoercivityError):
        coercivity_constant(1.0, 0.0, 0.0, -1.0)
    with pytest.raises(CoercivityError):
        entropy_majorant(0.0, 1.0, 0.0)
    with pytest.raises(CoercivityError):
        small_set_eta(0.0, 1.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 2.0), st.floats(0.5, 3.0), st.floats(-10.0, 0.0), st.floats(0.0, 5.0), st.floats(-3.0, -0.1))
def test_constant_decreases_as_entropy_bound_grows(m, e, H, dH, gamma):
    a = coercivity_constant(m, e, H, gamma)
    b = coercivity_constant(m, e, H + dH, gamma)
    assert b.log_C_coer <= a.log_C_coer
    assert a.log_C_coer == min(a.log_C_case1, a.log_C_case2)


def test_large_speed_branches_meet_continuously_at_gamma_minus_two():
    lo = coercivity_constant(1.0, 1.5, -4.0, -2.0 - 1e-12)
    hi = coercivity_constant(1.0, 1.5, -4.0, -2.0)
    assert lo.log_C_case1 == pytest.approx(hi.log_C_case1, abs=1e-9)
    # explicit prefactors on either side: (m/32) 2^-gamma and (9m/32) (3/2)^gamma
    a = coercivity_constant(1.0, 1.5, -4.0, -1.0)
    b = coercivity_constant(1.0, 1.5, -4.0, -2.5)
    assert a.log_C_case1 - b.log_C_case1 == pytest.approx(
        math.log(2.0 / 32.0) - math.log(9.0 / 32.0 * 1.5**-2.5), rel=1e-9
    )


def test_hypotheses_and_verification_on_maxwellian():
    g = build_grid(16, 5.0)
    s = maxwellian(g, 1.0, 1.0)
    cert = certificate_for_state(s, -1.0)
    assert hypotheses_hold(s, cert) == (True, "")
    out = verify_coercivity(s, cert)
    assert out["status"] == "checked" and out["pass"]
    assert out["log_numerical_min_ratio"] >= cert.log_C_coer
    heavier = s.scaled(1.1)
    ok, why = hypotheses_hold(heavier, cert)
    assert not ok and "mass" in why
    assert verify_coercivity(heavier, cert)["status"] == "hypotheses unmet"


def test_entropy_majorant_and_small_set_chain():
    g = build_grid(16, 5.0)
    s = mixture(g, [(0.5, 0.5, (1.0, 0.0, 0.0)), (0.5, 0.5, (-1.0, 0.0, 0.0))])
    cert = certificate_for_state(s, -2.0)
    assert entropy_majorant_slack(s, cert.H_tilde) >= 0.0
    rng = np.random.default_rng(0)
    sets = rng.random((20,) + g.shape) < 0.05
    slack = small_set_chain(s, sets, 3.0, cert.H_tilde)
    assert np.all(slack >= 0.0)
    with pytest.raises(CoercivityError):
        small_set_chain(s, sets, 0.0, cert.H_tilde)
