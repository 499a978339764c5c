"""Command line entry point: simulate, coercivity, verify and bench.

Exit codes: 0 when every asserted check passes, 2 when the only problems are
unmet hypotheses, 1 on a violated estimate or a runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .bench import TestFunctionFamily, run_bench
from .coercivity import certificate_for_state, coercivity_constant, verify_coercivity
from .config import ConfigError, RunConfig, parse_config
from .harness import (
    FAIL,
    PASS,
    UNMET,
    CheckReport,
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
from .solver import LandauOperator, Trajectory
from .state import moments

log = logging.getLogger("landau_soft")

CSV_COLUMNS = (
    "t",
    "mass",
    "px",
    "py",
    "pz",
    "energy",
    "entropy",
    "l2",
    "l2_alpha",
    "h1_gamma_half",
    "X",
    "M_neg3gamma",
    "coer_min_ratio",
    "gronwall_rhs",
    "trap_Xbar",
    "growth_env",
)
CURVE_COLUMNS = ("gronwall_rhs", "trap_Xbar", "growth_env")


def _fmt(x) -> str:
    return "%.17g" % float(x)


def write_timeseries(path, traj: Trajectory, reports: dict[str, CheckReport] | None = None) -> None:
    """CSV with the fixed header; bound curves are nan where no check produced them."""
    curves = {}
    for rep in (reports or {}).values():
        for name in CURVE_COLUMNS:
            if name in rep.curves:
                curves[name] = np.asarray(rep.curves[name], dtype=float)
    lines = [",".join(CSV_COLUMNS)]
    for i, row in enumerate(traj.rows):
        cells = []
        for col in CSV_COLUMNS:
            if col in CURVE_COLUMNS:
                c = curves.get(col)
                cells.append(_fmt(c[i]) if c is not None and i < len(c) else "nan")
            else:
                cells.append(_fmt(row.get(col, math.nan)))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def exit_code(statuses) -> int:
    statuses = list(statuses)
    if any(s == FAIL for s in statuses):
        return 1
    if any(s == UNMET for s in statuses):
        return 2
    return 0


def make_ledger(config: RunConfig) -> ConstantsLedger:
    led = ConstantsLedger.default()
    for name in ("c_pitt", "c_hardy", "c_parseval"):
        led.set(name, config[f"ledger.{name}"], "config", note=led.entries[name].note)
    return led


def simulate(config: RunConfig) -> Trajectory:
    st = config.initial_state()
    op = LandauOperator(st.grid, config.gamma, stencil_order=config["solver.stencil_order"])
    log.info("simulating gamma=%g on n=%d, L=%g", config.gamma, st.grid.n, st.grid.L)
    return op.simulate(st, config.solver_config(), alpha=config.alpha)


def run_checks(config: RunConfig, traj: Trajectory, ledger: ConstantsLedger) -> dict[str, CheckReport]:
    gam = config.gamma
    st0 = traj.states[0]
    q = moments(st0)
    cert = certificate_for_state(st0, gam)
    ledger.set("log_C_coer", cert.log_C_coer, "traced", log_space=True, note="certificate from (m0, e0, H0)")
    reports: dict[str, CheckReport] = {}
    trap = TrapParameters(
        epsilon=config["trap.epsilon"],
        delta=config["trap.delta"],
        coer_source=config["trap.coer_source"],
        lambda_mode=config["trap.lambda_mode"],
    )
    for name in config.checks:
        if name == "coercivity":
            op = LandauOperator(st0.grid, gam, stencil_order=config["solver.stencil_order"])
            ratios = traj.column("coer_min_ratio")
            worst = float(np.nanmin(ratios))
            res = verify_coercivity(st0, cert, op)
            ok = worst > 0 and math.log(worst) >= cert.log_C_coer
            status = UNMET if res["status"] == UNMET else (PASS if ok else FAIL)
            reports[name] = CheckReport(
                "coercivity", status, {"certificate": cert.to_dict(), "min_ratio_over_trajectory": worst, **res}
            )
        elif name == "gronwall":
            consts = derive_C1_C2(cert, q.mass, q.energy, gam, config["gronwall.mode"], traj, ledger)
            ledger.set("log_C1", consts.log_C1, consts.mode, log_space=True)
            ledger.set("C2", consts.C2, consts.mode)
            reports[name] = gronwall_check(traj, consts)
        elif name == "trap":
            if gam == -3.0:
                reports[name] = coulomb_check(traj, config.alpha, ledger, trap, cert)
            else:
                reports[name] = weighted_trap_check(traj, config.alpha, ledger, trap, cert)
        elif name == "h1":
            reports[name] = h1_integrability(traj)
        elif name == "local":
            reports[name] = local_estimate_check(traj, ledger, epsilon=config["local.epsilon"])
        elif name == "growth":
            reports[name] = growth_check(traj)
    return reports


def _payload(config: RunConfig, ledger: ConstantsLedger, reports: dict, **extra) -> dict:
    body = {
        "config": config.to_dict(),
        "ledger": ledger.to_dict(),
        "reports": {k: r.to_dict() for k, r in reports.items()},
    }
    body.update(extra)
    return body


def cmd_simulate(config: RunConfig, out_dir: Path) -> int:
    traj = simulate(config)
    write_timeseries(out_dir / config["output.csv"], traj)
    return 1 if traj.blowup else 0


def cmd_verify(config: RunConfig, out_dir: Path) -> int:
    ledger = make_ledger(config)
    traj = simulate(config)
    reports = run_checks(config, traj, ledger)
    code = exit_code([r.status for r in reports.values()] + ([FAIL] if traj.blowup else []))
    write_timeseries(out_dir / config["output.csv"], traj, reports)
    write_json(
        out_dir / config["output.json"],
        _payload(config, ledger, reports, exit_code=code, steps=traj.steps, blowup=traj.blowup),
    )
    for name, rep in reports.items():
        log.info("%-12s %s", name, rep.status)
    return code


def cmd_coercivity(config: RunConfig, out_dir: Path) -> int:
    v = config.values
    given = [v["coercivity.m0"], v["coercivity.e0"], v["coercivity.H0"]]
    if all(x is not None for x in given):
        cert = coercivity_constant(*given, config.gamma)
    elif any(x is not None for x in given):
        raise ConfigError("coercivity.m0, coercivity.e0 and coercivity.H0 must be given together")
    else:
        cert = certificate_for_state(config.initial_state(), config.gamma)
    ledger = make_ledger(config)
    ledger.set("log_C_coer", cert.log_C_coer, "traced", log_space=True)
    write_json(out_dir / config["output.json"], _payload(config, ledger, {}, certificate=cert.to_dict(), exit_code=0))
    return 0


def cmd_bench(config: RunConfig, out_dir: Path) -> int:
    fam = TestFunctionFamily(seed=config["seed"], count=config["bench.count"], n=config["bench.n"], L=config["bench.L"])
    reports = run_bench(fam, config.gamma, config.alpha)
    code = exit_code(r.status for r in reports.values())
    write_json(out_dir / config["output.json"], _payload(config, make_ledger(config), reports, exit_code=code))
    return code


COMMANDS = {"simulate": cmd_simulate, "coercivity": cmd_coercivity, "verify": cmd_verify, "bench": cmd_bench}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="landau-soft", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("config", nargs="?", help="key = value configuration file (defaults apply when omitted)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a configuration key")
    p.add_argument("--out-dir", default=".", help="directory for CSV and JSON outputs")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        text = Path(args.config).read_text() if args.config else ""
        overrides = {}
        for item in args.set:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            k, val = item.split("=", 1)
            overrides[k.strip()] = val.strip()
        config = parse_config(text, overrides)
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](config, out_dir)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
