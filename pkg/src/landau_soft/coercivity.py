"""Explicit coercivity constant for the averaged diffusion matrix, kept in log-space.

The constant is astronomically small (log C_coer is of order -10^4 for unit
data), so every quantity is carried as a natural logarithm and only compared
against logs of numerically observed ratios.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .grid import integrate
from .state import DistributionState, entropy_abs, moments

# 3 (2 pi)^3 e: bound on the negative part of f log f for f below a Gaussian tail
ENTROPY_TAIL_CONSTANT = 3.0 * (2.0 * math.pi) ** 3 * math.e

# relative slack used when checking that a state respects (m0, e0, H0)
HYPOTHESIS_RTOL = 1e-8


class CoercivityError(ValueError):
    pass


def entropy_majorant(m: float, e: float, H: float) -> float:
    """H~ = H + 2m + 2e + 3 (2 pi)^3 e, an upper bound for the integral of f |log f|."""
    if not m > 0 or e < 0 or not math.isfinite(H):
        raise CoercivityError("need m > 0, e >= 0 and finite H")
    return H + 2.0 * m + 2.0 * e + ENTROPY_TAIL_CONSTANT


def small_set_eta(epsilon: float, H_tilde: float) -> float:
    """log eta(eps) = log(eps / 2) - 2 H~ / eps."""
    if not epsilon > 0:
        raise CoercivityError("epsilon must be positive")
    return math.log(epsilon / 2.0) - 2.0 * H_tilde / epsilon


def _log_min(*logs: float) -> float:
    return min(logs)


@dataclass(frozen=True)
class CoercivityCertificate:
    gamma: float
    m0: float
    e0: float
    H0: float
    H_tilde: float
    R_star: float
    log_eta_quarter: float
    log_eta_eighth: float
    log_C_case1: float  # coefficient of |v|^gamma for |v| >= 2 R*
    log_C_case2: float  # uniform lower bound for |v| <= 2 R*
    log_conv_case1: float  # log of the |v|^gamma -> <v>^gamma factor (|v| <= <v>)
    log_conv_case2: float  # log of inf <v>^(-gamma) over the small ball (>= 1)
    log_C_coer: float

    @property
    def C_coer(self) -> float:
        """exp(log_C_coer); underflows to 0.0 for realistic data."""
        return math.exp(self.log_C_coer) if self.log_C_coer > -745.0 else 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def coercivity_constant(m0: float, e0: float, H0: float, gamma: float) -> CoercivityCertificate:
    if not (-3.0 <= gamma < 0.0):
        raise CoercivityError(f"gamma must lie in [-3, 0), got {gamma}")
    if not e0 > 0:
        raise CoercivityError("e0 must be positive")
    Ht = entropy_majorant(m0, e0, H0)
    R = 2.0 * math.sqrt(e0 / m0)
    log_R = math.log(R)
    le4 = small_set_eta(m0 / 4.0, Ht)
    le8 = small_set_eta(m0 / 8.0, Ht)

    # large |v|: the kernel factor is compared with (|v|/2) or (3|v|/2)
    inner1 = _log_min(math.log(2.0 / (9.0 * math.pi)) + le4 - log_R, math.log(4.0) + 2.0 * log_R)
    if gamma >= -2.0:
        log_c1 = math.log(m0 / 32.0) + gamma * math.log(0.5) + inner1
    else:
        log_c1 = math.log(9.0 * m0 / 32.0) + gamma * math.log(1.5) + inner1

    # small |v|: cone excluded with eta(m0/8), ball of radius (3 eta / 4 pi)^(1/3) removed
    inner2 = _log_min(le8 - math.log(18.0 * math.pi) - 3.0 * log_R, 0.0)
    log_c2 = (
        (gamma + 3.0) / 3.0 * (math.log(3.0 / (4.0 * math.pi)) + le8)
        + math.log(m0 / 24.0)
        - log_R
        + inner2
    )
    conv1 = 0.0
    conv2 = 0.0
    log_coer = min(log_c1 + conv1, log_c2 + conv2)
    return CoercivityCertificate(
        gamma=float(gamma),
        m0=float(m0),
        e0=float(e0),
        H0=float(H0),
        H_tilde=Ht,
        R_star=R,
        log_eta_quarter=le4,
        log_eta_eighth=le8,
        log_C_case1=log_c1,
        log_C_case2=log_c2,
        log_conv_case1=conv1,
        log_conv_case2=conv2,
        log_C_coer=log_coer,
    )


def certificate_for_state(state: DistributionState, gamma: float) -> CoercivityCertificate:
    q = moments(state)
    return coercivity_constant(q.mass, q.energy, q.entropy, gamma)


def hypotheses_hold(state: DistributionState, cert: CoercivityCertificate, rtol: float = HYPOTHESIS_RTOL) -> tuple[bool, str]:
    q = moments(state)
    if abs(q.mass - cert.m0) > rtol * cert.m0:
        return False, f"mass {q.mass:.12g} differs from m0={cert.m0:.12g}"
    if q.energy > cert.e0 * (1.0 + rtol):
        return False, f"energy {q.energy:.12g} exceeds e0={cert.e0:.12g}"
    if q.entropy > cert.H0 + rtol * max(1.0, abs(cert.H0)):
        return False, f"entropy {q.entropy:.12g} exceeds H0={cert.H0:.12g}"
    return True, ""


def verify_coercivity(state: DistributionState, cert: CoercivityCertificate, operator=None) -> dict:
    """Compare the smallest eigenvalue ratio of abar against the certificate."""
    from .solver import LandauOperator, coercivity_ratio

    ok, why = hypotheses_hold(state, cert)
    if not ok:
        return {"status": "hypotheses unmet", "reason": why, "pass": None, "log_C_coer": cert.log_C_coer}
    if operator is None:
        operator = LandauOperator(state.grid, cert.gamma)
    ratio = coercivity_ratio(operator, operator.compute_coefficients(state))
    passed = ratio > 0 and math.log(ratio) >= cert.log_C_coer
    return {
        "status": "checked",
        "numerical_min_ratio": ratio,
        "log_numerical_min_ratio": math.log(ratio) if ratio > 0 else -math.inf,
        "log_C_coer": cert.log_C_coer,
        "pass": bool(passed),
    }


def small_set_chain(state: DistributionState, sets: np.ndarray, log_delta: float, H_tilde: float) -> np.ndarray:
    """Slack of the chain  int_A f <= delta |A| + H~ / log(delta)  for each boolean mask in ``sets``.

    Returns rhs - lhs per set; all entries must be >= 0.
    """
    if not log_delta > 0:
        raise CoercivityError("delta must exceed 1")
    g = state.grid
    f = state.values
    out = []
    for A in sets:
        lhs = integrate(g, np.where(A, f, 0.0))
        vol = g.cell_volume * float(np.count_nonzero(A))
        # delta |A| may overflow when log_delta is huge; then the chain is trivial
        first = math.exp(log_delta) * vol if log_delta < 700.0 else (math.inf if vol > 0 else 0.0)
        out.append(first + H_tilde / log_delta - lhs)
    return np.array(out)


def entropy_majorant_slack(state: DistributionState, H_tilde: float) -> float:
    """H~ minus the integral of f |log f|; nonnegative when the bound holds."""
    return H_tilde - entropy_abs(state)
