"""Command-line entry point: ``ssprkse {run,converge,taylor,stability,keys}``.

Exit status: 0 success, 2 configuration error, 3 blow-up during ``run``.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from ..errors import BlowUpError, ConfigError
from ..stepper import integrate
from .config import describe, load_config
from .convergence import ConvergenceRow, make_reference, nsteps_for, run_convergence_study
from .snapshots import read_snapshot, write_snapshot
from .stability import StabilityRow, largest_stable, run_stability_probe
from .tables import write_table
from .taylor import TaylorRow, run_taylor_check

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="key=value config file")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config entry (repeatable)")
    common.add_argument("--scenario", help="channel or periodic")
    common.add_argument("--scheme", help="ssprk2se, ssprk3se, fese or unsplit")
    common.add_argument("--m", type=str, help="substep count M")
    common.add_argument("--t-end", dest="t_end", type=str, help="run length (s)")
    common.add_argument("-o", "--out", help="write the CSV here instead of stdout")

    p = argparse.ArgumentParser(prog="ssprkse", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="single simulation with optional snapshots")
    r.add_argument("--dt", type=str)
    r.add_argument("--snapshot-interval", dest="snapshot_interval", type=str)
    r.add_argument("--snapshot-dir", dest="snapshot_dir")
    r.add_argument("--restart", help="continue from this snapshot (.bin)")
    cv = sub.add_parser("converge", parents=[common], help="temporal convergence table")
    cv.add_argument("--dts", type=str, help="comma-separated halving dt list")
    cv.add_argument("--ref-dt", dest="ref_dt", type=str)
    cv.add_argument("--no-reconcile", action="store_true")
    cv.add_argument("--mixing", action="store_true")
    tc = sub.add_parser("taylor", parents=[common], help="substep Taylor-expansion residuals")
    tc.add_argument("--dts", type=str)
    st = sub.add_parser("stability", parents=[common], help="bounded-after-N-steps sweep over dt_btr")
    st.add_argument("--dt-btrs", dest="dt_btrs", type=str)
    st.add_argument("--nsteps", type=str)
    sub.add_parser("keys", help="print the documented configuration keys")
    return p


def _overrides(args) -> dict:
    ov = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects SECTION.KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        ov[k.strip()] = v
    flag_keys = {"scenario": "grid.scenario", "scheme": "scheme.scheme", "m": "scheme.m",
                 "t_end": "scheme.t_end", "dt": "scheme.dt", "snapshot_interval": "output.snapshot_interval",
                 "snapshot_dir": "output.dir", "ref_dt": "scheme.ref_dt", "dt_btrs": "scheme.dt_btrs",
                 "nsteps": "scheme.nsteps"}
    for attr, key in flag_keys.items():
        v = getattr(args, attr, None)
        if v is not None:
            ov[key] = v
    if getattr(args, "dts", None) is not None:
        ov["scheme.taylor_dts" if args.command == "taylor" else "scheme.dts"] = args.dts
    if getattr(args, "no_reconcile", False):
        ov["scheme.reconcile"] = "false"
    if getattr(args, "mixing", False):
        ov["scheme.mixing"] = "true"
    return ov


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_run(cfg, args) -> int:
    sc = cfg.scenario()
    scheme = cfg.scheme_config()
    state = read_snapshot(args.restart) if args.restart else sc.state
    remaining = cfg["scheme.t_end"] - state.time
    n = nsteps_for(remaining, scheme.dt) if remaining > 0 else 0
    interval = cfg["output.snapshot_interval"]
    outdir = Path(cfg["output.dir"])
    start = int(round(state.time / scheme.dt))
    rows = []

    def record(k, s):
        step = start + k
        h_sum = s.stack.h.sum(axis=0) - s.H
        rows.append({"step": step, "time": float(s.time), "max_u": s.stack.u.max_abs(),
                     "max_zeta": float(np.abs(s.zeta).max()),
                     "mass": float(s.stack.h.sum()) * sc.grid.cell_area,
                     "ssh_gap": float(np.abs(h_sum - s.zeta).max())})
        if interval and step % interval == 0:
            write_snapshot(outdir / f"snap_{step:07d}", s, step=step, scheme=scheme.scheme.value)

    record(0, state)
    try:
        integrate(state, sc.params, scheme, n, callback=record)
    except BlowUpError as e:
        _emit(write_table(rows, ["step", "time", "max_u", "max_zeta", "mass", "ssh_gap"],
                          digits=cfg["output.digits"]), args.out)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BLOWUP
    _emit(write_table(rows, ["step", "time", "max_u", "max_zeta", "mass", "ssh_gap"],
                      digits=cfg["output.digits"]), args.out)
    return EXIT_OK


def _cmd_converge(cfg, args) -> int:
    sc = cfg.scenario()
    ref = make_reference(sc, cfg["scheme.ref_dt"])
    s = cfg.values["scheme"]
    rows = run_convergence_study(sc, s["scheme"], s["dts"], s["m"], ref, reconcile=s["reconcile"],
                                 mixing=s["mixing"], workers=cfg["output.workers"])
    _emit(write_table(rows, ConvergenceRow.FIELDS, digits=cfg["output.digits"]), args.out)
    if ref.self_error is not None:
        print(f"reference self-error {ref.self_error:.3E}", file=sys.stderr)
    return EXIT_OK


def _cmd_taylor(cfg, args) -> int:
    p = cfg.values["physics"]
    from ..tendencies import PhysicalParams
    rows = run_taylor_check(PhysicalParams(f=p["f"], g=p["g"]), cfg["scheme.taylor_dts"], cfg["scheme.m"])
    _emit(write_table(rows, TaylorRow.FIELDS, digits=cfg["output.digits"]), args.out)
    return EXIT_OK


def _cmd_stability(cfg, args) -> int:
    sc = cfg.scenario()
    s = cfg.values["scheme"]
    rows = run_stability_probe(sc, s["scheme"], s["dt_btrs"], s["m"], nsteps=s["nsteps"],
                               reconcile=s["reconcile"])
    _emit(write_table(rows, StabilityRow.FIELDS, digits=cfg["output.digits"]), args.out)
    print(f"largest stable dt_btr for {s['scheme'].value}: {largest_stable(rows):g}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "converge": _cmd_converge, "taylor": _cmd_taylor, "stability": _cmd_stability}


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    if args.command == "keys":
        print(describe())
        return EXIT_OK
    try:
        cfg = load_config(args.config, _overrides(args), args.command)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
