"""Command-line workbench: eigen tables, program runs, protocols,
level-diagram assignment, tomography and the acceptance suite.

All file output uses fixed 12-significant-digit float formatting, so
identical inputs produce byte-identical files.  Every error path exits
nonzero with a single machine-parseable line on stderr.  System and
program arguments resolve against the filesystem first and then against
the data shipped with the package, so `spinsim eigen citrate.spin` works
from any directory.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import acquisition as acq
from . import assignment as asg
from . import dynamics as dyn
from . import protocols as pr
from . import pulselang as pl
from .core import (SpinSystem, SpinSystemError, eigensystem, load_spin_system,
                   mixing_angle_ab, parse_spin_system, transition_catalog)

USAGE_ERROR = 2


class CliError(Exception):
    def __init__(self, message: str, code: int = USAGE_ERROR):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    system_path: str = ""
    program: str = ""
    out_dir: Path = Path(".")
    threshold: float = 0.05
    points: int = 512
    dwell: float | None = None
    beta: float = 10.0
    t1_points: int = 256
    t2_points: int = 1024
    init: str = "eq"
    extra: dict = field(default_factory=dict)


def _data_text(kind: str, name: str) -> str | None:
    base = resources.files("spinsim").joinpath("data")
    candidates = [base.joinpath(kind, name)]
    if kind == "":
        candidates = [base.joinpath(name)]
    for c in candidates:
        try:
            return c.read_text(encoding="utf-8")
        except (FileNotFoundError, NotADirectoryError):
            continue
    return None


def _read_resource(path: str, kind: str) -> tuple[str, str]:
    """Return (text, display_name); filesystem first, shipped data second."""
    p = Path(path)
    if p.exists():
        return p.read_text(encoding="utf-8"), str(path)
    text = _data_text(kind, Path(path).name)
    if text is not None:
        return text, Path(path).name
    raise CliError(f"cannot find {path!r} (not a file or shipped {kind} entry)")


def _load_system(path: str) -> SpinSystem:
    text, name = _read_resource(path, "systems")
    return parse_spin_system(text, source=name)


def _initial_state(es, init: str, catalog) -> dyn.DeviationDensityMatrix:
    if init == "eq":
        return dyn.equilibrium_deviation(es)
    if init.startswith("pure:"):
        label = init.split(":", 1)[1]
        k = es.index_of_label(label)
        mat = np.zeros((es.dim, es.dim), dtype=complex)
        mat[k, k] = 1.0
        return dyn.DeviationDensityMatrix(mat, es)
    if init.startswith("pps:"):
        label = init.split(":", 1)[1]
        if es.n != 2:
            raise CliError("pps: initial states are defined for 2-spin systems")
        return pr.pseudopure_2spin(es, label, catalog).final_state
    raise CliError(f"unknown initial state {init!r}")


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------

def cmd_eigen(args) -> int:
    sys_ = _load_system(args.system)
    es = eigensystem(sys_, weak=args.weak)
    cat = transition_catalog(es, args.threshold)
    out = [f"system {sys_.name}", f"nspins {sys_.n}"]
    if sys_.n == 2:
        th = mixing_angle_ab(sys_)
        out.append(f"theta_ab {th:.1f} deg ({th:.12g})")
    for k in range(es.dim):
        out.append(
            f"level {k + 1} label {es.labels[k]} mz {es.mz[k]:.12g} "
            f"energy_hz {es.energies[k] / (2 * math.pi):.12g}")
    nobs = 0
    for t in cat.entries:
        nobs += 1 if t.observable else 0
        out.append(
            f"transition {t.tid} lower {es.labels[t.lower]} "
            f"upper {es.labels[t.upper]} freq_hz {t.freq_hz:.12g} "
            f"intensity {t.intensity:.12g} obs {1 if t.observable else 0}")
    out.append(f"observable {nobs} of {len(cat.entries)}")
    print("\n".join(out))
    return 0


def cmd_run(args) -> int:
    sys_ = _load_system(args.system)
    es = eigensystem(sys_)
    cat = transition_catalog(es, args.threshold)
    text, name = _read_resource(args.program, "programs")
    program = pl.parse_program(text, source=name)
    rho0 = _initial_state(es, args.init, cat)

    acquire = None
    instructions = program.instructions
    if instructions and isinstance(instructions[-1], pl.Acquire):
        acquire = instructions[-1]
        program = pl.PulseProgram(instructions[:-1], program.cycle)
    final = pl.execute_cycled(program, es, rho0, cat, t1=args.t1, t2=args.t2)

    out_dir = Path(args.out)
    stem = Path(name).stem
    _write(out_dir / f"{stem}.state", dyn.format_state(final))
    spec = acq.detect_small_angle(es, dyn.crush_gradient(final), args.beta, cat)
    _write(out_dir / f"{stem}.spectrum", spec.to_csv())
    if acquire is not None:
        fid = acq.acquire_fid(es, final, acquire.points, acquire.dwell_s)
        rows = [f"{m * acquire.dwell_s:.12g},{z.real:.12g},{z.imag:.12g}"
                for m, z in enumerate(fid)]
        _write(out_dir / f"{stem}.fid", "\n".join(rows) + "\n")
        freqs, vals = acq.fft_spectrum(fid, acquire.dwell_s)
        rows = [f"{f:.12g},{z.real:.12g},{z.imag:.12g}"
                for f, z in zip(freqs, vals)]
        _write(out_dir / f"{stem}.fft", "\n".join(rows) + "\n")
    print(f"wrote {out_dir / (stem + '.state')} and spectrum")
    return 0


def _protocol_report(es, cat, name: str, args):
    if name.startswith("pps"):
        return pr.pseudopure_2spin(es, name[3:], cat), None
    if name.startswith("pops:"):
        res = pr.pops_pair(es, int(name.split(":", 1)[1]), cat)
        rep = pr.ProtocolReport(
            name=f"pops{res.transition.tid}", program_text=res.program_text,
            final_state=res.difference,
            metrics={"scale": res.scale},
            info={"pair": f"{es.labels[res.transition.lower]},"
                          f"{es.labels[res.transition.upper]}"})
        return rep, None
    if name.startswith("dj1:"):
        return pr.dj_one_qubit(es, name.split(":", 1)[1], cat), None
    if name.startswith("dj2:"):
        rep, dataset = pr.dj_two_qubit_2d(
            es, name.split(":", 1)[1], cat,
            t1_points=args.t1_points, t2_points=args.t2_points)
        return rep, dataset
    if name == "epr":
        return pr.epr_create(es, cat), None
    if name == "ghz":
        return pr.ghz_create(es, cat), None
    if name.startswith("gate:"):
        return pr.gate_library_2spin(es, int(name.split(":", 1)[1]), cat), None
    if name == "c3not":
        return pr.c3not_4spin(es, cat), None
    if name == "c2swap":
        return pr.c2swap_4spin(es, cat), None
    raise CliError(f"unknown protocol {name!r}")


def cmd_protocol(args) -> int:
    sys_ = _load_system(args.system)
    es = eigensystem(sys_)
    cat = transition_catalog(es, args.threshold)
    rep, dataset = _protocol_report(es, cat, args.name, args)
    out_dir = Path(args.out)
    _write(out_dir / f"{rep.name}.pp", rep.program_text)
    _write(out_dir / f"{rep.name}.state", dyn.format_state(rep.final_state))
    _write(out_dir / f"{rep.name}.report", rep.format_report())
    if dataset is not None and args.write_2d:
        _write(out_dir / f"{rep.name}.2d", dataset.to_text())
        _write(out_dir / f"{rep.name}.grid", dataset.to_gnuplot_grid())
    print(rep.format_report(), end="")
    return 0


def cmd_assign(args) -> int:
    text, name = _read_resource(args.connectivity, "")
    cm = asg.parse_connectivity(text, source=name)
    result = asg.reconstruct_levels(cm, args.nspins,
                                    max_solutions=args.max_solutions)
    if not result.diagrams:
        detail = ""
        if result.conflict:
            detail = " first conflicting triple: " + \
                ",".join(str(t) for t in result.conflict)
        raise CliError(f"unsatisfiable connectivity matrix;{detail}")
    print(f"solutions {len(result.diagrams)} "
          f"truncated {1 if result.truncated else 0}")
    out_dir = Path(args.out) if args.out else None
    for i, ld in enumerate(result.diagrams, start=1):
        text = asg.format_diagram(ld)
        if ld.ambiguous:
            text += "ambiguous " + " ".join(str(t) for t in ld.ambiguous) + "\n"
        if out_dir is not None:
            _write(out_dir / f"diagram_{i:03d}.levels", text)
        elif i == 1:
            print(text, end="")
    return 0


def cmd_tomo(args) -> int:
    sys_ = _load_system(args.system)
    es = eigensystem(sys_)
    cat = transition_catalog(es, args.threshold)
    if args.protocol:
        rep, _ = _protocol_report(es, cat, args.protocol, args)
        rho = rep.final_state
        label = rep.name
    elif args.state:
        rho = dyn.load_state(args.state, es)
        label = Path(args.state).stem
    else:
        raise CliError("tomo needs --protocol NAME or --state FILE")
    diag, under = acq.tomo_diagonal(es, rho, args.beta, cat)
    dataset, table = acq.tomo_offdiagonal_2d(
        es, rho, t1_points=args.t1_points, t2_points=args.t2_points,
        catalog=cat)
    scale = acq.tomo_scale_calibration(es, rho, cat)
    recon, fidelity = acq.reconstruct_density(es, diag, table,
                                              scale.scale, reference=rho)
    out_dir = Path(args.out)
    _write(out_dir / f"{label}_tomo.state", dyn.format_state(recon))
    rows = ["k,l,order,freq_hz,re,im,magnitude"]
    for r in sorted(table.rows, key=lambda r: (-r.magnitude, r.k, r.l)):
        rows.append(f"{r.k + 1},{r.l + 1},{r.order},{r.freq_hz:.12g},"
                    f"{r.value.real:.12g},{r.value.imag:.12g},{r.magnitude:.12g}")
    _write(out_dir / f"{label}_tomo.coherences", "\n".join(rows) + "\n")
    report = [f"name={label}_tomo",
              f"fidelity={fidelity:.12g}",
              f"scale_ratio={scale.ratio:.12g}",
              f"underdetermined={1 if under else 0}"]
    _write(out_dir / f"{label}_tomo.report", "\n".join(report) + "\n")
    print("\n".join(report))
    return 0


def cmd_accept(args) -> int:
    from . import acceptance
    results = acceptance.run_all(verbose=True)
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="spinsim",
        description="workbench for QIP on strongly coupled spin systems")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, points=False):
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--threshold", type=float, default=0.05,
                        help="relative intensity threshold for observability")
        sp.add_argument("--beta", type=float, default=10.0,
                        help="small-angle detection pulse, degrees")
        if points:
            sp.add_argument("--t1-points", type=int, default=256)
            sp.add_argument("--t2-points", type=int, default=1024)

    sp = sub.add_parser("eigen", help="print eigen table and transitions")
    sp.add_argument("system")
    sp.add_argument("--threshold", type=float, default=0.05)
    sp.add_argument("--weak", action="store_true",
                    help="truncate the J coupling to its weak form")
    sp.set_defaults(func=cmd_eigen)

    sp = sub.add_parser("run", help="run a pulse program on a system")
    sp.add_argument("system")
    sp.add_argument("program")
    sp.add_argument("--init", default="eq",
                    help="initial state: eq, pps:<bits> or pure:<bits>")
    sp.add_argument("--t1", type=float, default=None,
                    help="value for the symbolic t1 delay, seconds")
    sp.add_argument("--t2", type=float, default=None)
    common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("protocol", help="run a named experiment")
    sp.add_argument("name", help="pps00|pps01|pps10|pps11|pops:<tid>|"
                    "dj1:<f1..f4>|dj2:<f1..f8>|epr|ghz|gate:<1..24>|"
                    "c3not|c2swap")
    sp.add_argument("system")
    sp.add_argument("--write-2d", action="store_true",
                    help="also write 2D dataset text and gnuplot grid")
    common(sp, points=True)
    sp.set_defaults(func=cmd_protocol)

    sp = sub.add_parser("assign", help="reconstruct level diagrams")
    sp.add_argument("connectivity", help="connectivity matrix file")
    sp.add_argument("nspins", type=int)
    sp.add_argument("--max-solutions", type=int, default=64)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_assign)

    sp = sub.add_parser("tomo", help="tomograph a state or protocol output")
    sp.add_argument("system")
    sp.add_argument("--protocol", default=None)
    sp.add_argument("--state", default=None)
    common(sp, points=True)
    sp.set_defaults(func=cmd_tomo)

    sp = sub.add_parser("accept", help="run the acceptance suite")
    sp.set_defaults(func=cmd_accept)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except pl.PulseProgramError as exc:
        print(str(exc), file=sys.stderr)
        return USAGE_ERROR
    except (SpinSystemError, asg.AssignmentError, pr.ProtocolError,
            acq.AcquisitionError, dyn.DynamicsError, CliError, KeyError,
            FileNotFoundError) as exc:
        code = exc.code if isinstance(exc, CliError) else USAGE_ERROR
        msg = exc.args[0] if exc.args else str(exc)
        print(f"spinsim: error: {msg}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
