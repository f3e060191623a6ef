"""Command-line entry point ``r1lab``.

Every subcommand builds a RunReport (JSON on stdout, or ``--out``). Exit
codes: 0 when every result passed, 1 on a verification failure, 2 on bad
flags or unreadable input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .convexity import (
    ScanConfig,
    box_sampler,
    det_positive_sampler,
    null_lagrangian_fit,
    rank_one_scan,
    zigzag_scan,
)
from .errors import R1LabError
from .integrands import integrand_from_id, lb_integral_identity, lb_integral_quadrature
from .laminate import DiscreteMeasure, test_measure
from .matrix_core import FULL, SPACES, SYMMETRIC, minor_specs
from .prelaminate import HomSplitRequest, diagonal_homogeneity_split, lemma_hom_split, verify_prelaminate
from .reports import jsonable
from .suites import run_all

SUBCOMMANDS = ("verify-all", "scan", "jensen", "prelaminate", "fit-nl", "identity-check")
EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(R1LabError):
    pass


@dataclass
class Command:
    subcommand: str
    flags: dict = field(default_factory=dict)
    seed: int = 0

    def to_json(self) -> dict:
        return {"subcommand": self.subcommand, "seed": self.seed, "flags": jsonable(self.flags)}


@dataclass
class Result:
    """One named entry of a run report; ``table`` feeds ``--format csv``."""

    kind: str
    name: str
    passed: bool
    payload: dict
    table: tuple[list[str], list[list]] | None = None

    def to_json(self) -> dict:
        return {"kind": self.kind, "name": self.name, "passed": self.passed,
                "report": jsonable(self.payload)}


@dataclass
class RunReport:
    tool_version: str
    command_echo: Command
    results: list[Result]

    @property
    def overall_pass(self) -> bool:
        return all(r.passed for r in self.results)

    def to_json(self) -> dict:
        return {"tool_version": self.tool_version, "command_echo": self.command_echo.to_json(),
                "results": [r.to_json() for r in self.results], "overall_pass": self.overall_pass}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False, allow_nan=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        tables = [r for r in self.results if r.table is not None]
        if not tables:
            writer.writerow(["name", "passed"])
            for r in self.results:
                writer.writerow([r.name, int(r.passed)])
        for r in tables:
            header, rows = r.table
            if len(tables) > 1:
                writer.writerow([f"# {r.name}"])
            writer.writerow(header)
            writer.writerows(rows)
        return buf.getvalue()


# ---------------------------------------------------------------------------
# input files


def parse_measure_file(path: str) -> DiscreteMeasure:
    """Read a measure from JSON: {"space", "n", "atoms": [{"weight", "matrix"}]}."""
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read measure file {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"measure file {path!r} is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise UsageError(f"measure file {path!r} must hold a JSON object")
    return DiscreteMeasure.from_json(obj)


def _parse_matrix(text: str) -> np.ndarray:
    """'1,2;3,4' -> [[1, 2], [3, 4]]."""
    try:
        rows = [[float(x) for x in row.split(",")] for row in text.split(";")]
        a = np.array(rows, dtype=float)
    except ValueError:
        raise UsageError(f"cannot parse matrix {text!r}; use rows separated by ';'") from None
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise UsageError(f"matrix {text!r} is not square")
    return a


# ---------------------------------------------------------------------------
# subcommands


def _scan_table(rep) -> tuple[list[str], list[list]]:
    header = ["t_minus", "t_0", "t_plus", "gap"]
    return header, [[*w.t, w.gap] for w in rep.witnesses]


def _run_verify_all(cmd: Command) -> list[Result]:
    out = []
    for suite, rep in run_all(cmd.seed, cmd.flags["samples"]):
        out.append(Result("verification", f"{suite}/{rep.name}", rep.passed, rep.to_json()))
    return out


def _run_scan(cmd: Command) -> list[Result]:
    fl = cmd.flags
    cfg = ScanConfig(seed=cmd.seed, n_base_points=fl["samples"], n_directions=fl["directions"],
                     tolerance=fl["tol"])
    if fl["kind"] == "zigzag":
        rep = zigzag_scan(fl["p"], cfg)
    else:
        if not fl["integrand"]:
            raise UsageError("scan needs --integrand")
        rep = rank_one_scan(integrand_from_id(fl["integrand"], fl["n"]), cfg, n=fl["n"])
    return [Result("scan", rep.integrand, rep.passed, rep.to_json(), _scan_table(rep))]


def _run_jensen(cmd: Command) -> list[Result]:
    fl = cmd.flags
    if not fl["measure"]:
        raise UsageError("jensen needs --measure")
    nu = parse_measure_file(fl["measure"])
    if fl["family"] == "default":
        family = None
    else:
        family = [integrand_from_id(i.strip(), nu.n) for i in fl["family"].split(",") if i.strip()]
    rep = test_measure(nu, family, tolerance=fl["tol"])
    table = (["integrand", "gap"], [[k, v] for k, v in rep.per_integrand_gaps.items()])
    return [Result("laminate_test", "jensen", rep.passed, rep.to_json(), table)]


def _run_prelaminate(cmd: Command) -> list[Result]:
    fl = cmd.flags
    if fl["kind"] == "lemma-hom":
        try:
            z, w = complex(fl["z"]), complex(fl["w"])
        except ValueError:
            raise UsageError("--z and --w must be complex numbers such as 1 or 0.5+2j") from None
        P, lam1, lam2 = lemma_hom_split(HomSplitRequest(fl["a"], z, w, fl["t"]))
        extra = {"lambda_1": lam1, "lambda_2": lam2}
    elif fl["kind"] == "diagonal":
        if not fl["matrix"]:
            raise UsageError("--kind diagonal needs --matrix")
        P = diagonal_homogeneity_split(_parse_matrix(fl["matrix"]), fl["t"], fl["space"])
        extra = {}
    else:
        raise UsageError(f"unknown prelaminate kind {fl['kind']!r}")
    check = verify_prelaminate(P)
    rows = list(csv.reader(io.StringIO(P.atoms_csv())))
    width = max(len(r) for r in rows) - 1
    table = (["weight"] + [f"x{i}" for i in range(width)], rows)
    payload = {**extra, "prelaminate": P.to_json(), "verification": check.to_json()}
    return [Result("prelaminate", fl["kind"], check.passed, payload, table)]


def _run_fit_nl(cmd: Command) -> list[Result]:
    fl = cmd.flags
    if not fl["integrand"]:
        raise UsageError("fit-nl needs --integrand")
    n = fl["n"]
    f = integrand_from_id(fl["integrand"], n)
    if fl["region"] == "det-positive":
        sampler = det_positive_sampler(n)
    else:
        sampler = box_sampler(n, space=fl["space"])
    fit = null_lagrangian_fit(f, sampler, ScanConfig(seed=cmd.seed, n_base_points=fl["samples"]), n=n)
    rows = [["const", fit.c]] + [[s.label, v] for s, v in zip(minor_specs(n), fit.v)]
    passed = fit.residual <= fl["tol"]
    return [Result("null_lagrangian_fit", f.name, passed, fit.to_json(), (["minor", "coefficient"], rows))]


def _run_identity(cmd: Command) -> list[Result]:
    fl = cmd.flags
    try:
        z, w = complex(fl["z"]), complex(fl["w"])
    except ValueError:
        raise UsageError("--z and --w must be complex numbers such as 1 or 0.5+2j") from None
    p = fl["p"]
    lhs, rhs = lb_integral_identity(z, w, p)
    quad = lb_integral_quadrature(z, w, p)
    closed_err = abs(lhs - rhs) / max(1.0, abs(rhs))
    quad_err = abs(quad - rhs) / max(1.0, abs(rhs))
    passed = closed_err <= fl["tol"] and quad_err <= 1e-6
    payload = {"z": z, "w": w, "p": p, "lhs_closed_form": lhs, "rhs": rhs, "lhs_quadrature": quad,
               "closed_form_error": closed_err, "quadrature_error": quad_err}
    table = (["p", "lhs_closed_form", "lhs_quadrature", "rhs"], [[p, lhs, quad, rhs]])
    return [Result("identity", "L-B_p integral identity", passed, payload, table)]


RUNNERS = {
    "verify-all": _run_verify_all,
    "scan": _run_scan,
    "jensen": _run_jensen,
    "prelaminate": _run_prelaminate,
    "fit-nl": _run_fit_nl,
    "identity-check": _run_identity,
}


def run(cmd: Command) -> tuple[RunReport, int]:
    if cmd.subcommand not in RUNNERS:
        raise UsageError(f"unknown subcommand {cmd.subcommand!r}")
    report = RunReport(__version__, cmd, RUNNERS[cmd.subcommand](cmd))
    return report, EXIT_PASS if report.overall_pass else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="r1lab", description="Rank-one convexity verification toolkit.")
    parser.add_argument("--version", action="version", version=f"r1lab {__version__}")
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)

    def common(p, samples, tol):
        p.add_argument("--seed", type=_seed, default=None,
                       help="integer seed (default: $R1LAB_SEED or 0)")
        p.add_argument("--out", default=None, help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        if samples is not None:
            p.add_argument("--samples", type=int, default=samples)
        if tol is not None:
            p.add_argument("--tol", type=float, default=tol)

    p = sub.add_parser("verify-all", help="run every property suite")
    common(p, 200, None)

    p = sub.add_parser("scan", help="sampled rank-one (or zigzag) convexity scan")
    common(p, 1000, 1e-9)
    p.add_argument("--integrand", default=None)
    p.add_argument("--kind", choices=("rank-one", "zigzag"), default="rank-one")
    p.add_argument("--directions", type=int, default=100)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--p", type=float, default=1.5)

    p = sub.add_parser("jensen", help="laminate test of a discrete measure")
    common(p, None, 1e-9)
    p.add_argument("--measure", default=None)
    p.add_argument("--family", default="default")

    p = sub.add_parser("prelaminate", help="build and verify a splitting tree")
    common(p, None, None)
    p.add_argument("--kind", choices=("lemma-hom", "diagonal"), default="lemma-hom")
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--t", type=float, default=2.0)
    p.add_argument("--z", default="1")
    p.add_argument("--w", default="0")
    p.add_argument("--matrix", default=None, help="rows separated by ';', e.g. '3,0;0,-2'")
    p.add_argument("--space", choices=SPACES, default=FULL)

    p = sub.add_parser("fit-nl", help="least-squares fit by an affine combination of minors")
    common(p, 1000, 1e-10)
    p.add_argument("--integrand", default=None)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--space", choices=SPACES, default=FULL)
    p.add_argument("--region", choices=("box", "det-positive"), default="box")

    p = sub.add_parser("identity-check", help="the L / B_p integral identity")
    common(p, None, 1e-12)
    p.add_argument("--p", type=float, default=1.5)
    p.add_argument("--z", default="1")
    p.add_argument("--w", default="0")
    return parser


def parse_command(argv: list[str]) -> tuple[Command, dict]:
    """Parse argv into a Command plus output options (out, format)."""
    ns = build_parser().parse_args(argv)
    if ns.subcommand is None:
        raise UsageError(f"a subcommand is required: {', '.join(SUBCOMMANDS)}")
    flags = vars(ns).copy()
    seed = flags.pop("seed")
    if seed is None:
        env = os.environ.get("R1LAB_SEED")
        try:
            seed = _seed(env) if env is not None else 0
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"R1LAB_SEED: {exc}") from None
    output = {"out": flags.pop("out"), "format": flags.pop("format")}
    sub = flags.pop("subcommand")
    if flags.get("samples", 1) < 1:
        raise UsageError("--samples must be positive")
    if sub == "fit-nl" and flags["region"] == "det-positive" and flags["space"] == SYMMETRIC:
        raise UsageError("--region det-positive samples full matrices only")
    return Command(sub, flags, seed), output


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cmd, output = parse_command(argv)
        report, code = run(cmd)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (R1LabError, ValueError) as exc:
        print(f"r1lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = report.to_csv() if output["format"] == "csv" else report.dumps()
    if output["out"]:
        try:
            with open(output["out"], "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"r1lab: error: cannot write {output['out']!r}: {exc.strerror}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
