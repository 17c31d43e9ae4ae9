"""Command-line entry point.

Subcommands dispatch to the library: ``simulate`` (time integration with
streamed NDJSON diagnostics and binary snapshots), ``converge`` (smoothing
ladder study), ``groundstate`` (Petviashvili + shooting oracle),
``verify-inequalities`` (product-rule / commutator / trilinear sampling),
``split-data`` (low/high frequency preprocessing), and ``thresholds``
(smallness-condition report).

Exit codes: 0 success, 1 usage or configuration error, 2 physics failure
(window contraction exhausted, blow-up threshold, non-finite fields).  A
manifest recording inputs, seed, and version is always written, even when
the run fails.
"""

import argparse
import hashlib
import json
import os
import subprocess
import sys

import numpy as np

from . import __version__
from . import diagnostics as dg
from . import fields as fs
from . import groundstate as gst
from . import initial_data as idata
from . import integrate as it
from . import studies as st
from .config import load_config
from .errors import (
    BlowUp,
    MagzakError,
    MaxIterExceeded,
    NonContraction,
    NonFinite,
    ParseError,
    UnknownGenerator,
    ValidationError,
)

_PHYSICS_ERRORS = (BlowUp, NonContraction, MaxIterExceeded, NonFinite)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def version_string():
    """git-describe when available, the package version otherwise."""
    try:
        out = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=5,
            cwd=os.path.dirname(os.path.abspath(__file__)),
        )
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except Exception:
        pass
    return f"magzak-{__version__}"


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


class Manifest:
    """Written up front and finalized at the end, so it survives failures."""

    def __init__(self, out_dir, command, config_path, seed, threads):
        self.path = os.path.join(out_dir, "manifest.json")
        self.data = {
            "command": command,
            "config": os.path.abspath(config_path),
            "config_sha256": _sha256(config_path),
            "seed": int(seed),
            "threads": int(threads),
            "version": version_string(),
            "outputs": [],
            "status": "running",
        }
        self.write()

    def add_output(self, name):
        if name not in self.data["outputs"]:
            self.data["outputs"].append(name)
        self.write()

    def finish(self, status="ok"):
        self.data["status"] = status
        self.write()

    def write(self):
        with open(self.path, "w", encoding="utf-8") as fh:
            json.dump(self.data, fh, indent=2)
            fh.write("\n")


def _say(quiet, message):
    if not quiet:
        print(message)


def _make_state(cfg):
    return idata.generate_initial_data(cfg.initial, cfg.grid, seed=cfg.seed, params=cfg.params)


# -- subcommand bodies -----------------------------------------------------------


def _cmd_simulate(cfg, out_dir, manifest, quiet):
    state = _make_state(cfg)
    lfd = None
    if cfg.integrator.modified_mode:
        state, lfd = st.split_initial_data(state)

    diag_path = os.path.join(out_dir, "diagnostics.ndjson")
    manifest.add_output("diagnostics.ndjson")
    snap_count = [0]

    with open(diag_path, "w", encoding="utf-8") as diag_fh:

        def on_record(rec, _state):
            diag_fh.write(rec.to_json() + "\n")

        def on_snapshot(s):
            name = f"snapshot_{snap_count[0]:04d}.mzk"
            fs.write_state_snapshot(os.path.join(out_dir, name), s)
            manifest.add_output(name)
            snap_count[0] += 1

        result = it.run(state, cfg.integrator, lfd=lfd, on_record=on_record, on_snapshot=on_snapshot)

    final = result.state
    fs.write_state_snapshot(os.path.join(out_dir, "state_final.mzk"), final)
    manifest.add_output("state_final.mzk")
    if cfg.integrator.modified_mode:
        reconstructed = it.from_modified(final, lfd)
        fs.write_state_snapshot(os.path.join(out_dir, "state_final_reconstructed.mzk"), reconstructed)
        manifest.add_output("state_final_reconstructed.mzk")
    _say(quiet, f"simulate: t = {final.time:g}, {len(result.records)} diagnostics records")
    return 0


def _cmd_converge(cfg, out_dir, manifest, quiet, threads):
    ladder = cfg.study["ladder"]
    if len(ladder) < 2:
        raise _UsageError("converge needs a ladder with at least two entries")
    state = _make_state(cfg)
    table = st.epsilon_convergence_study(
        state, ladder, cfg.study["T"], cfg.integrator, workers=max(1, threads)
    )
    with open(os.path.join(out_dir, "convergence.csv"), "w", encoding="utf-8") as fh:
        fh.write(table.to_csv())
    manifest.add_output("convergence.csv")
    summary = table.summary()
    summary.update({"seed": cfg.seed, "grid": repr(cfg.grid)})
    with open(os.path.join(out_dir, "convergence_summary.json"), "w", encoding="utf-8") as fh:
        fh.write(st.study_summary_json(summary) + "\n")
    manifest.add_output("convergence_summary.json")
    _say(quiet, f"converge: combined differences {summary['combined']}")
    return 0


def _cmd_groundstate(cfg, out_dir, manifest, quiet):
    gsopt = cfg.groundstate
    d = gsopt["d"] if gsopt["d"] else cfg.grid.d
    if gsopt["N"] and gsopt["P"]:
        grid = gst.sg.TorusGrid(d, gsopt["N"], gsopt["P"])
    else:
        grid = gst.default_grid(d)
    gs = gst.petviashvili(d, grid, tol=gsopt["tol"])
    oracle_mass, oracle_q0 = gst.shooting_mass(d)
    gst.write_groundstate(os.path.join(out_dir, f"groundstate_d{d}.mzk"), gs)
    manifest.add_output(f"groundstate_d{d}.mzk")
    report = {
        "d": d,
        "grid": repr(grid),
        "mass": gs.mass,
        "residual": gs.residual,
        "K4": gs.k4,
        "K8": gs.k8,
        "stabilizer_final": gs.stabilizer,
        "oracle_mass": oracle_mass,
        "oracle_Q0": oracle_q0,
        "mass_rel_error_vs_oracle": abs(gs.mass - oracle_mass) / oracle_mass,
    }
    with open(os.path.join(out_dir, "groundstate.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    manifest.add_output("groundstate.json")
    _say(quiet, f"groundstate: mass = {gs.mass:.6f} (oracle {oracle_mass:.6f})")
    return 0


def _cmd_verify_inequalities(cfg, out_dir, manifest, quiet):
    study = cfg.study
    kato = st.kato_ponce_ratio(
        cfg.grid,
        study["s"],
        study["exponents"],
        study["samples"],
        seed=study["seed"],
        kcut=study["kcut"],
        collect=True,
    )
    tri = st.trilinear_cancellation(
        cfg.grid, study["s"], study["samples"], seed=study["seed"], kcut=study["kcut"], collect=True
    )
    for name, result in (("kato_ponce", kato), ("trilinear", tri)):
        rows = result.pop("rows")
        with open(os.path.join(out_dir, f"{name}_samples.csv"), "w", encoding="utf-8") as fh:
            fh.write(st.rows_to_csv(rows))
        manifest.add_output(f"{name}_samples.csv")
    summary = {"kato_ponce": kato, "trilinear": tri}
    with open(os.path.join(out_dir, "inequalities.json"), "w", encoding="utf-8") as fh:
        fh.write(st.study_summary_json(summary) + "\n")
    manifest.add_output("inequalities.json")
    _say(
        quiet,
        f"verify-inequalities: product max {kato['product_max']:.4f}, "
        f"cancellation max {tri['max_J13_plus_J22']:.3e}",
    )
    return 0


def _cmd_split_data(cfg, out_dir, manifest, quiet):
    state = _make_state(cfg)
    modified, lfd = st.split_initial_data(state)
    fs.write_state_snapshot(os.path.join(out_dir, "initial_modified.mzk"), modified)
    manifest.add_output("initial_modified.mzk")
    low_container = modified.copy()
    low_container.E[:] = 0.0
    low_container.n[:] = 0.0
    low_container.n_t = lfd.n_1L
    low_container.B = lfd.B_0L
    low_container.B_t = lfd.B_1L
    fs.write_state_snapshot(os.path.join(out_dir, "low_frequency.mzk"), low_container)
    manifest.add_output("low_frequency.mzk")
    g = cfg.grid
    s = cfg.params.s
    report = {
        "n1_Hs-1": fs.sobolev_norm(g, state.n_t, s - 1.0),
        "n1L_H4": fs.sobolev_norm(g, lfd.n_1L, 4.0),
        "n1H_Hs-1_int_Hm1": fs.intersection_norm(g, modified.n_t, s - 1.0, -1.0),
        "B0_Hs": fs.sobolev_norm(g, state.B, s),
        "B0L_H4": fs.sobolev_norm(g, lfd.B_0L, 4.0),
        "B0H_Hs_int_Hm1": fs.intersection_norm(g, modified.B, s, -1.0),
        "B1_Hs-2": fs.sobolev_norm(g, state.B_t, s - 2.0),
        "B1L_H4": fs.sobolev_norm(g, lfd.B_1L, 4.0),
        "B1H_Hs-2_int_Hm2": fs.intersection_norm(g, modified.B_t, s - 2.0, -2.0),
    }
    with open(os.path.join(out_dir, "split_report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    manifest.add_output("split_report.json")
    _say(quiet, "split-data: wrote initial_modified.mzk, low_frequency.mzk")
    return 0


def _cmd_thresholds(cfg, out_dir, manifest, quiet):
    state = _make_state(cfg)
    psi0 = dg.psi(state)
    q_mass, _ = gst.shooting_mass(cfg.grid.d)
    report = dg.threshold_report(cfg.grid, state.E, psi0, q_mass)
    with open(os.path.join(out_dir, "thresholds.json"), "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    manifest.add_output("thresholds.json")
    _say(quiet, f"thresholds: passed = {report.passed}, margin = {report.margin:.4g}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "converge": _cmd_converge,
    "groundstate": _cmd_groundstate,
    "verify-inequalities": _cmd_verify_inequalities,
    "split-data": _cmd_split_data,
    "thresholds": _cmd_thresholds,
}


def build_parser():
    parser = _Parser(prog="magzak", description="Magnetic Zakharov simulator and verifier")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to the run configuration")
    parser.add_argument("--out", default=None, help="output directory (default from config)")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed override")
    parser.add_argument("--threads", type=int, default=None, help="worker threads (converge)")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1

    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("MAGZAK_THREADS", "1"))

    try:
        cfg = load_config(args.config)
    except FileNotFoundError:
        print(f"usage error: config {args.config!r} not found", file=sys.stderr)
        return 1
    except (ParseError, ValidationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1

    if args.seed is not None:
        cfg.seed = args.seed
        if cfg.initial.get("generator") == "random-smooth":
            cfg.initial["seed"] = args.seed
    out_dir = args.out if args.out is not None else cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    manifest = Manifest(out_dir, args.command, args.config, cfg.seed, threads)

    command = _COMMANDS[args.command]
    try:
        if args.command == "converge":
            code = command(cfg, out_dir, manifest, args.quiet, threads)
        else:
            code = command(cfg, out_dir, manifest, args.quiet)
    except _UsageError as exc:
        manifest.finish(f"usage-error: {exc}")
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except _PHYSICS_ERRORS as exc:
        manifest.finish(f"physics-failure: {type(exc).__name__}: {exc}")
        print(f"physics failure: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, UnknownGenerator) as exc:
        manifest.finish(f"usage-error: {exc}")
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except MagzakError as exc:
        manifest.finish(f"error: {type(exc).__name__}: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return 1
    manifest.finish("ok")
    return code


if __name__ == "__main__":
    sys.exit(main())
