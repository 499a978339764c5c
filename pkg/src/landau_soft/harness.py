"""Post-processing of trajectories into verdicts on the a-priori estimates.

Every check is a pure function of (trajectory rows, ledger, parameters) and
returns a :class:`CheckReport`.  Status values:

* ``"pass"`` / ``"fail"``: the estimate was asserted and held / was violated;
* ``"hypotheses unmet"``: a smallness or regime assumption failed, so nothing
  was asserted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .coercivity import CoercivityCertificate
from .grid import integrate
from .solver import Trajectory, default_alpha, growth_moment_order
from .state import DistributionState, moments

PROVENANCE = ("traced", "fitted", "config")

PASS = "pass"
FAIL = "fail"
UNMET = "hypotheses unmet"

# relative slack for residuals of fitted inequalities (round-off only)
FIT_RTOL = 1e-9


class HarnessError(ValueError):
    pass


@dataclass
class LedgerEntry:
    value: float
    provenance: str
    log_space: bool = False
    note: str = ""

    def __post_init__(self):
        if self.provenance not in PROVENANCE:
            raise HarnessError(f"unknown provenance {self.provenance!r}")


@dataclass
class ConstantsLedger:
    """Named constants, each tagged traced / fitted / config.

    Entries flagged ``log_space`` hold natural logarithms.
    """

    entries: dict = field(default_factory=dict)

    @classmethod
    def default(cls) -> "ConstantsLedger":
        led = cls()
        led.set("c_pitt", 1.0, "config", note="empirical normaliser of the frequency-side bound")
        led.set("c_hardy", 0.25, "config", note="sharp Hardy constant in dimension 3")
        led.set("c_parseval", 1.0, "config", note="unitary transform: int h^2 = int |h^|^2")
        return led

    def set(self, name: str, value: float, provenance: str, log_space: bool = False, note: str = "") -> None:
        self.entries[name] = LedgerEntry(float(value), provenance, log_space, note)

    def get(self, name: str) -> float:
        try:
            return self.entries[name].value
        except KeyError:
            raise HarnessError(f"constant {name!r} missing from ledger") from None

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def to_dict(self) -> dict:
        return {
            k: {"value": e.value, "provenance": e.provenance, "log_space": e.log_space, "note": e.note}
            for k, e in sorted(self.entries.items())
        }


@dataclass
class CheckReport:
    name: str
    status: str
    details: dict = field(default_factory=dict)
    curves: dict = field(default_factory=dict)  # per-row arrays

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "details": _jsonable(self.details),
            "curves": {k: _jsonable(list(v)) for k, v in sorted(self.curves.items())},
        }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def time_derivative(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Second-order finite differences on a possibly non-uniform time grid."""
    if len(t) < 2:
        return np.zeros_like(y)
    if len(t) == 2:
        d = (y[1] - y[0]) / (t[1] - t[0])
        return np.array([d, d])
    return np.gradient(y, t, edge_order=2)


def _valid_rows(traj: Trajectory) -> Trajectory:
    """Rows without the trailing blow-up marker."""
    rows = [r for r in traj.rows if not r.get("blowup")]
    return Trajectory(traj.gamma, traj.alpha, traj.states[: len(rows)], rows, traj.blowup, traj.steps, traj.config)


def _loglog_slope(t: np.ndarray, y: np.ndarray) -> float:
    x = np.log1p(t)
    ly = np.log(y)
    if len(t) < 2 or np.ptp(x) == 0.0:
        return 0.0
    return float(np.polyfit(x, ly, 1)[0])


# ---------------------------------------------------------------------------
# Theorem part 1: Gronwall bound for gamma in [-2, 0)


@dataclass
class GronwallConstants:
    log_C1: float  # log C1 (C1 can be far beyond float range in traced mode)
    C2: float
    mode: str
    trace: list

    @property
    def C1(self) -> float:
        return math.exp(self.log_C1) if self.log_C1 < 709.0 else math.inf


def derive_C1_C2(
    cert: CoercivityCertificate,
    m0: float,
    e0: float,
    gamma: float,
    mode: str = "traced",
    trajectory: Trajectory | None = None,
    ledger: ConstantsLedger | None = None,
) -> GronwallConstants:
    """Constants of d/dt |f|^2 <= C1 + C2 |f|^2.

    ``traced`` composes the explicit chain with R = 1: the far-field term,
    the Pitt/frequency-split bound, the Young split with q = 10/(4+gamma) and
    the absorption of the gradient term; ``fitted`` makes the inequality tight
    along ``trajectory``.
    """
    if not (-2.0 <= gamma < 0.0):
        raise HarnessError(f"Theorem part 1 covers gamma in [-2, 0); got gamma={gamma}")
    ledger = ledger or ConstantsLedger.default()
    if mode == "traced":
        return _traced_C1_C2(cert, m0, e0, gamma, ledger)
    if mode == "fitted":
        if trajectory is None:
            raise HarnessError("fitted mode needs a reference trajectory")
        return _fitted_C1_C2(trajectory)
    raise HarnessError(f"mode must be 'traced' or 'fitted', got {mode!r}")


def _traced_C1_C2(cert, m0, e0, gamma, ledger) -> GronwallConstants:
    g = gamma
    R = 1.0
    c_pitt = ledger.get("c_pitt")
    c_pars = ledger.get("c_parseval")
    trace = []
    # epsilon from ((6 - gamma)/5) eps^2 = C_coer / 2
    log_eps = 0.5 * (cert.log_C_coer + math.log(5.0 / (2.0 * (6.0 - g))))
    trace.append(f"log eps = {log_eps:.10g} from ((6-g)/5) eps^2 = C_coer/2, log C_coer = {cert.log_C_coer:.10g}")
    c_gamma = 2.0 ** (-g / 2.0)
    trace.append(f"c_gamma = 2^(-g/2) = {c_gamma:.10g} (bound on <v>^-g / <v*>^-g for |v - v*| <= R=1)")
    M_bound = m0 + 2.0 * e0
    trace.append(f"M_(-g) <= int (1+|v|^2) f = m + 2e = {M_bound:.10g}")
    pref = 3.0 * c_gamma * (g + 3.0) * (1.0 + R * R) ** (-g / 2.0) * c_pitt * 2.0 * max(m0 * m0, c_pars) * M_bound
    log_K = (g - 6.0) / 5.0 * log_eps + math.log(pref)
    trace.append(f"K = eps^((g-6)/5) * 3 c_g (g+3) (1+R^2)^(-g/2) c_pitt 2 max(m^2, c_pars) M ; log K = {log_K:.10g}")
    q = 10.0 / (4.0 + g)
    trace.append(f"Young exponents p = 10/(6-g) = {10.0 / (6.0 - g):.10g}, q = 10/(4+g) = {q:.10g}")
    log_C1 = math.log(2.0 / q) + q * log_K
    trace.append(f"C1 = 2 K^q / q ; log C1 = {log_C1:.10g}")
    C_coer = cert.C_coer
    C2 = 2.0 * (g + 3.0) * m0 * R**g + C_coer * g * g / 4.0
    trace.append(f"C2 = 2 (g+3) m R^g + C_coer g^2/4 = {C2:.17g}")
    return GronwallConstants(log_C1, C2, "traced", trace)


def _fitted_C1_C2(traj: Trajectory) -> GronwallConstants:
    traj = _valid_rows(traj)
    t = traj.times
    X = traj.column("l2") ** 2
    D = time_derivative(t, X)
    # nonnegative least squares for D ~ C1 + C2 X, then lift C1 so D <= C1 + C2 X everywhere
    A = np.stack([np.ones_like(X), X], axis=1)
    (_, C2), _ = nnls(A, D)
    C1 = max(0.0, float(np.max(D - C2 * X)))
    C1 *= 1.0 + FIT_RTOL
    trace = [
        f"fitted on {len(t)} outputs: C2 = {C2:.17g} (nnls), C1 = {C1:.17g} = max_t (dX/dt - C2 X)",
    ]
    return GronwallConstants(math.log(C1) if C1 > 0 else -math.inf, float(C2), "fitted", trace)


def gronwall_check(traj: Trajectory, consts: GronwallConstants) -> CheckReport:
    if not (-2.0 <= traj.gamma < 0.0):
        raise HarnessError(f"Theorem part 1 covers gamma in [-2, 0); got gamma={traj.gamma}")
    traj = _valid_rows(traj)
    t = traj.times
    lhs = traj.column("l2") ** 2
    X0 = lhs[0]
    log_rhs = np.empty_like(t)
    rhs = np.empty_like(t)
    margin = np.empty_like(t)
    for k, tk in enumerate(t):
        if tk == 0.0 or consts.log_C1 == -math.inf:
            inner = math.log(X0)
        else:
            inner = np.logaddexp(math.log(X0), consts.log_C1 + math.log(tk))
        log_rhs[k] = consts.C2 * tk + inner
        if tk == 0.0:
            rhs[k] = X0
        elif log_rhs[k] < 709.0:
            rhs[k] = math.exp(consts.C2 * tk) * (X0 + (consts.C1 * tk if consts.log_C1 > -math.inf else 0.0))
        else:
            rhs[k] = math.inf
        margin[k] = rhs[k] - lhs[k]
    ok = bool(np.all(log_rhs >= np.log(lhs)) and np.all(margin >= 0.0))
    status = PASS if ok and not traj.blowup else FAIL
    return CheckReport(
        "gronwall",
        status,
        {
            "mode": consts.mode,
            "log_C1": consts.log_C1,
            "C2": consts.C2,
            "margin_t0": float(margin[0]),
            "min_log_margin": float(np.min(log_rhs - np.log(lhs))),
            "trace": consts.trace,
        },
        {"gronwall_rhs": rhs, "gronwall_log_rhs": log_rhs, "margin": margin},
    )


# ---------------------------------------------------------------------------
# Theorem part 2: weighted trap for gamma in [-3, -2]


def ball_weight_constant(grid, alpha: float, gamma: float, R: float) -> float:
    """K(R) = [sum over nodes with |v| <= R of <v>^(-2 alpha - gamma) |v|^2 h^3]^(1/2).

    Grid quadrature makes the Cauchy-Schwarz step exact on discrete data.
    """
    inside = grid.speed <= R
    w = np.where(inside, grid.bracket ** (-2.0 * alpha - gamma) * grid.speed2, 0.0)
    return math.sqrt(integrate(grid, w))


def mass_lower_bound(state: DistributionState, alpha: float, gamma: float, radii=None) -> dict:
    """Explicit lower bound on A^2 = int <v>^gamma g^2 / |v|^2 from mass and energy.

    For every R:  m <= K(R) A + 2e/R^2, so  A >= (m - 2e/R^2) / K(R).
    """
    g = state.grid
    q = moments(state)
    m, e = q.mass, q.energy
    if radii is None:
        radii = np.linspace(g.h, g.L * math.sqrt(3.0), 200)
    best, best_R = 0.0, math.nan
    for R in radii:
        K = ball_weight_constant(g, alpha, gamma, R)
        if K <= 0:
            continue
        val = (m - 2.0 * e / R**2) / K
        if val > best:
            best, best_R = val, float(R)
    return {"A_low": best, "R_opt": best_R, "m": m, "e": e}


def hardy_weighted_A2(state: DistributionState, alpha: float, gamma: float) -> float:
    g = state.grid
    w = g.bracket ** alpha * state.values
    return integrate(g, g.bracket**gamma * w * w / g.speed2)


@dataclass
class TrapParameters:
    epsilon: float = 1.0
    delta: float | None = None  # default C_coer / 2
    coer_source: str = "empirical"  # or "certified"
    lambda_mode: str = "explicit"  # or "fitted"


def _trap_core(
    name: str,
    traj: Trajectory,
    alpha: float,
    ledger: ConstantsLedger,
    params: TrapParameters,
    cert: CoercivityCertificate | None,
    phi,
    bracket,
) -> CheckReport:
    """Shared trap logic.

    ``phi(eps, E)`` multiplies C_I X^(1/3) in the bracket C_coer - C_I phi X^(1/3);
    ``bracket(eps, m, C_coer)`` is the explicit coefficient Lambda of X.
    """
    traj = _valid_rows(traj)
    gam = traj.gamma
    t = traj.times
    X = traj.column("X")
    H = traj.column("h1_weighted")  # |grad(<v>^(gamma/2) g)|^2 with g = <v>^alpha f
    state0 = traj.states[0]
    q0 = moments(state0)
    m = q0.mass
    E = q0.mass + 2.0 * q0.energy  # int <v>^2 f

    if params.coer_source == "certified":
        if cert is None:
            raise HarnessError("certified coercivity source needs a certificate")
        log_C = cert.log_C_coer
        coer_prov = "traced"
    elif params.coer_source == "empirical":
        C_emp = float(np.min(traj.column("coer_min_ratio")))
        if C_emp <= 0:
            return CheckReport(name, FAIL, {"reason": "nonpositive coercivity ratio", "C_coer": C_emp})
        log_C = math.log(C_emp)
        coer_prov = "fitted"
    else:
        raise HarnessError("coer_source must be 'certified' or 'empirical'")
    C_coer = math.exp(log_C) if log_C > -745.0 else 0.0
    ledger.set("C_coer_trap", log_C, coer_prov, log_space=True, note=f"{params.coer_source} coercivity constant")

    delta = params.delta if params.delta is not None else 0.5 * C_coer
    if C_coer > 0 and not (0.0 < delta < C_coer):
        raise HarnessError("delta must lie in (0, C_coer)")
    eps = params.epsilon
    if not eps > 0:
        raise HarnessError("epsilon must be positive")

    lb = mass_lower_bound(state0, alpha, gam)
    c_hardy = ledger.get("c_hardy")
    P = delta * c_hardy * lb["A_low"] ** 2
    ledger.set("P_trap", P, "traced", note="delta * c_hardy * A_low^2, A_low from the mass/energy chain")

    D = time_derivative(t, X)
    if params.lambda_mode == "explicit":
        Lam = bracket(eps, m, C_coer)
        ledger.set("Lambda_trap", Lam, "config", note="bracket of X with unit generic constants")
    elif params.lambda_mode == "fitted":
        Lam = max(0.0, float(np.max((D + P) / X))) * (1.0 + FIT_RTOL)
        ledger.set("Lambda_trap", Lam, "fitted", note="smallest Lambda with dX/dt <= -P + Lambda X")
    else:
        raise HarnessError("lambda_mode must be 'explicit' or 'fitted'")

    # C_I: smallest constant for which the differential form holds at every output
    ph = phi(eps, E)
    need = (D + C_coer * H - Lam * X) / (H * ph * np.cbrt(X))
    C_I = max(0.0, float(np.max(need))) * (1.0 + FIT_RTOL)
    ledger.set("C_I_trap", C_I, "fitted", note="interpolation constant in the differential form")
    resid_diff = D - (-H * (C_coer - C_I * ph * np.cbrt(X)) + Lam * X)
    resid_F = D - (-P + Lam * X)

    if C_coer <= delta:
        X_tilde = 0.0
    elif C_I > 0:
        X_tilde = (C_coer - delta) ** 3 / (C_I**3 * ph**3)
    else:
        X_tilde = math.inf
    X_eq = P / Lam if Lam > 0 else math.inf
    X_bar = min(X_tilde, X_eq)
    details = {
        "gamma": gam,
        "alpha": alpha,
        "epsilon": eps,
        "delta": delta,
        "C_coer_source": params.coer_source,
        "lambda_mode": params.lambda_mode,
        "log_C_coer": log_C,
        "E": E,
        "A_low": lb["A_low"],
        "R_opt": lb["R_opt"],
        "P": P,
        "Lambda": Lam,
        "C_I": C_I,
        "X_tilde": X_tilde,
        "X_eq": X_eq,
        "X_bar": X_bar,
        "X0": float(X[0]),
        "sup_X": float(np.max(X)),
        "max_residual_differential_form": float(np.max(resid_diff)),
        "max_residual_F": float(np.max(resid_F)),
    }
    curves = {
        "X": X,
        "trap_Xbar": np.full_like(X, X_bar),
        "residual_differential_form": resid_diff,
        "residual_F": resid_F,
    }
    if not X[0] <= X_bar:
        details["reason"] = "smallness unmet: X(0) > X_bar"
        return CheckReport(name, UNMET, details, curves)
    ok = bool(np.max(X) <= X_bar * (1.0 + 1e-3)) and not traj.blowup
    return CheckReport(name, PASS if ok else FAIL, details, curves)


def _trap_forms(gam: float, alpha: float):
    """(phi, bracket) of the differential form; gamma = -3 uses the Coulomb forms,
    where the near-field factor is 1 + O(eps) and the far field is m (1/eps + 1/eps^2)."""
    if gam == -3.0:

        def phi(eps, E):
            return (1.0 + (1.0 + eps * eps) ** alpha * (eps + 2.0 * eps * eps)) * E ** (1.0 / 3.0)

        def bracket(eps, m, C_coer):
            return 9.0 / 4.0 * C_coer + m * (1.0 / eps + 1.0 / eps**2)

    else:

        def phi(eps, E):
            return eps ** (3.0 + gam) * (1.0 + eps * eps) ** alpha * E ** (1.0 / 3.0)

        def bracket(eps, m, C_coer):
            return gam * gam / 4.0 * C_coer + (gam + 3.0) * m * eps**gam

    return phi, bracket


def weighted_trap_check(
    traj: Trajectory,
    alpha: float,
    ledger: ConstantsLedger,
    params: TrapParameters | None = None,
    cert: CoercivityCertificate | None = None,
) -> CheckReport:
    gam = traj.gamma
    if not (-3.0 <= gam <= -2.0):
        raise HarnessError(f"Theorem part 2 covers gamma in [-3, -2]; got gamma={gam}")
    if alpha < default_alpha(gam) - 1e-12:
        raise HarnessError(f"weight needs alpha >= -1 - 3/2 gamma = {default_alpha(gam)}")
    phi, bracket = _trap_forms(gam, alpha)
    return _trap_core("weighted_trap", traj, alpha, ledger, params or TrapParameters(), cert, phi, bracket)


def coulomb_identity(state: DistributionState, alpha: float) -> dict:
    """II evaluated through c_bar = -8 pi f and through 4 pi int <v>^(2 alpha) f^3."""
    from .kernel import COULOMB_DELTA_WEIGHT

    g = state.grid
    f = state.values
    gw = g.bracket**alpha * f
    c_bar = COULOMB_DELTA_WEIGHT * f
    via_c = -0.5 * integrate(g, c_bar * gw * gw)
    direct = 4.0 * math.pi * integrate(g, g.bracket ** (2.0 * alpha) * f**3)
    rel = abs(via_c - direct) / max(abs(direct), 1e-300)
    return {"II_c_contraction": via_c, "II_cubic": direct, "rel_diff": rel}


def coulomb_check(
    traj: Trajectory,
    alpha: float,
    ledger: ConstantsLedger,
    params: TrapParameters | None = None,
    cert: CoercivityCertificate | None = None,
    tol: float = 1e-10,
) -> CheckReport:
    if traj.gamma != -3.0:
        raise HarnessError(f"the Coulomb check needs gamma = -3; got gamma={traj.gamma}")
    traj = _valid_rows(traj)
    ids = [coulomb_identity(s, alpha) for s in traj.states]
    worst = max(d["rel_diff"] for d in ids)
    if worst > tol:
        return CheckReport(
            "coulomb", FAIL, {"reason": "II identity mismatch: delta path broken", "max_rel_diff": worst}
        )
    if alpha < default_alpha(-3.0) - 1e-12:
        raise HarnessError(f"weight needs alpha >= -1 - 3/2 gamma = {default_alpha(-3.0)}")
    phi, bracket = _trap_forms(-3.0, alpha)
    rep = _trap_core("coulomb", traj, alpha, ledger, params or TrapParameters(), cert, phi, bracket)
    rep.details["II_max_rel_diff"] = worst
    rep.details["II_t0"] = ids[0]
    rep.curves["II"] = np.array([d["II_cubic"] for d in ids])
    return rep


# ---------------------------------------------------------------------------
# local estimate for gamma in (-3, -2)


def phi_schedule(t, epsilon: float, gamma: float):
    """phi(t) = eps^(1/(3+gamma)) (1+t)^(-1/(3 (3+gamma)))."""
    t = np.asarray(t, dtype=float)
    return epsilon ** (1.0 / (3.0 + gamma)) * (1.0 + t) ** (-1.0 / (3.0 * (3.0 + gamma)))


def local_estimate_check(
    traj: Trajectory,
    ledger: ConstantsLedger,
    epsilon: float = 0.1,
    coer_source: str = "empirical",
    cert: CoercivityCertificate | None = None,
) -> CheckReport:
    gam = traj.gamma
    if not (-3.0 < gam < -2.0):
        raise HarnessError(f"the local estimate covers gamma in (-3, -2); got gamma={gam}")
    traj = _valid_rows(traj)
    t = traj.times
    M = traj.column("M_neg3gamma")
    C_mom = float(np.max(M / (1.0 + t)))
    ledger.set("C_moment", C_mom, "fitted", note="max_t M_(-3 gamma)(t) / (1+t)")
    slope = _loglog_slope(t, M)

    l2 = traj.column("l2")
    X = l2**2
    J = traj.column("h1_gamma_half")
    D = time_derivative(t, X)
    if coer_source == "certified":
        if cert is None:
            raise HarnessError("certified coercivity source needs a certificate")
        c_coer = cert.C_coer
        prov = "traced"
    else:
        c_coer = float(np.min(traj.column("coer_min_ratio")))
        prov = "fitted"
    ledger.set("c_coer_local", c_coer, prov)
    p = -3.0 / gam
    Y = l2 ** ((18.0 + 4.0 * gam) / 9.0)
    kappa = -gam / (3.0 * (3.0 + gam))
    grad_term = -(c_coer - epsilon / p * Y) * J
    basis = l2 + (1.0 + t) ** kappa * Y
    C_loc = max(0.0, float(np.max((D - grad_term) / basis)))
    C_loc *= 1.0 + FIT_RTOL
    ledger.set("C_local", C_loc, "fitted", note="generic constant of the local differential inequality")
    rhs = grad_term + C_loc * basis
    resid = D - rhs
    ok_slope = slope <= 1.1
    ok_resid = bool(np.all(resid <= FIT_RTOL * np.maximum(np.abs(rhs), np.abs(D)) + 1e-300))
    details = {
        "epsilon": epsilon,
        "phi_t0": float(phi_schedule(0.0, epsilon, gam)),
        "phi_exponent": -1.0 / (3.0 * (3.0 + gam)),
        "C_moment": C_mom,
        "loglog_slope_M": slope,
        "p": p,
        "c_coer": c_coer,
        "C_local": C_loc,
        "max_residual_l5": float(np.max(resid)),
    }
    curves = {"phi": phi_schedule(t, epsilon, gam), "M_over_1pt": M / (1.0 + t), "residual_l5": resid}
    status = PASS if ok_slope and ok_resid and not traj.blowup else FAIL
    return CheckReport("local_estimate", status, details, curves)


# ---------------------------------------------------------------------------
# growth bound for gamma in (-2, 0)


def growth_check(traj: Trajectory, gamma: float | None = None) -> CheckReport:
    gam = traj.gamma if gamma is None else gamma
    if not (-2.0 < gam < 0.0):
        raise HarnessError(f"the growth bound needs gamma in (-2, 0) (mu diverges at -2); got gamma={gam}")
    traj = _valid_rows(traj)
    mu = growth_moment_order(gam)
    t = traj.times
    Mmu = traj.column("M_mu")
    c_mu = float(np.max(Mmu / (1.0 + t)))
    X = traj.column("l2") ** 2
    C = float(np.max(X / (1.0 + t) ** 2))
    slope = _loglog_slope(t, X)
    env = C * (1.0 + t) ** 2
    ok = slope <= 2.1 and bool(np.all(X <= env * (1.0 + FIT_RTOL))) and not traj.blowup
    return CheckReport(
        "growth",
        PASS if ok else FAIL,
        {"mu": mu, "c_mu": c_mu, "C": C, "loglog_slope": slope},
        {"growth_env": env},
    )


# ---------------------------------------------------------------------------
# Theorem part 3


def h1_integrability(traj: Trajectory, alpha: float | None = None) -> CheckReport:
    """Trapezoid integral over time of |f|^2_(L^2_alpha) + |grad(<v>^alpha f)|^2."""
    if alpha is not None and alpha != traj.alpha:
        raise HarnessError("h1 integrability uses the trajectory's alpha diagnostics")
    valid = _valid_rows(traj)
    t = valid.times
    integrand = valid.column("l2_alpha") ** 2 + valid.column("h1_alpha")
    value = float(np.trapezoid(integrand, t)) if len(t) > 1 else 0.0
    finite = math.isfinite(value) and not traj.blowup
    return CheckReport(
        "h1_integrability",
        PASS if finite else FAIL,
        {"integral": value, "T": float(t[-1]) if len(t) else 0.0, "partial": bool(traj.blowup), "alpha": traj.alpha},
        {"h1_alpha_norm2": integrand},
    )
