"""Batch front end: load problem documents, run tasks, emit artifacts.

A problem document is a JSON object::

    {
      "task": "verify-solution",          // optional, checked against argv
      "phi": "p - 1",                     // Hamiltonian, where needed
      "functions": {"z": { ...piecewise function... }},
      "params": { ...task-specific parameters... }
    }

Task parameters name functions from the ``functions`` table: ``function``
for single-input tasks, ``functions: [left, right]`` plus ``norm`` for
``distance``, ``family`` for the lattice tasks, ``u``/``z1``/``z2`` for
``verify-envelope``, and ``lower``/``upper``/``nodes`` for ``solve``.
Sampling controls (``tolerance``, ``p_max``, ``samples``, ``extra``) may
also appear under ``params``.

Exit status: 0 verdict true / successful run, 1 verdict false or
non-convergence, 2 input error.  Reports go to stdout; ``--out`` writes a
JSON report, ``--csv`` delimited samples, ``--svg`` a rendered figure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .graphdist import NORMS, graph_of, hausdorff_distance
from .hamiltonian import Hamiltonian, ParseError, parse
from .perron import (
    GridFn,
    NonConvergenceError,
    SolveConfig,
    perron_solve,
)
from .pwfn import PiecewiseFn, _aff, lattice_inf, lattice_sup
from .viscosity import (
    SampleConfig,
    VerificationReport,
    verify_envelope_solution,
    verify_interval_solution,
    verify_subsolution,
    verify_supersolution,
)

TASKS = (
    "check-hcont", "envelope", "complete", "distance",
    "lattice-sup", "lattice-inf",
    "verify-sub", "verify-super", "verify-solution", "verify-envelope",
    "solve",
)


class InputError(ValueError):
    """Problem-document or argument validation failure (exit status 2)."""


# ---------------------------------------------------------------------------
# Document handling
# ---------------------------------------------------------------------------

def load_doc(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(
            f"invalid JSON in {path} at line {exc.lineno} column {exc.colno}: "
            f"{exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise InputError(f"{path}: document must be a JSON object")
    return doc


def _doc_functions(doc: dict) -> dict[str, PiecewiseFn]:
    table = doc.get("functions", {})
    if not isinstance(table, dict):
        raise InputError("'functions' must be an object of named functions")
    out = {}
    for name, data in table.items():
        try:
            out[name] = PiecewiseFn.from_json(data)
        except ValueError as exc:
            raise InputError(f"function {name!r}: {exc}") from exc
    return out


def _get_fn(functions: dict[str, PiecewiseFn], name: object,
            what: str) -> PiecewiseFn:
    if not isinstance(name, str) or name not in functions:
        raise InputError(f"{what}: unknown function name {name!r}")
    return functions[name]


def _get_phi(doc: dict, override: str | None = None) -> Hamiltonian:
    src = override if override is not None else doc.get("phi")
    if not isinstance(src, str):
        raise InputError("this task needs a Hamiltonian under key 'phi'")
    try:
        ham = parse(src)
    except ParseError as exc:
        raise InputError(f"phi: {exc}") from exc
    if ham.has_division:
        print("warning: phi contains division; joint continuity of phi "
              "is not checked", file=sys.stderr)
    return ham


def _sample_config(params: dict, seed: int) -> SampleConfig:
    return SampleConfig(
        tolerance=float(params.get("tolerance", 1e-9)),
        p_max=float(params.get("p_max", 1e3)),
        samples=int(params.get("samples", 41)),
        extra=int(params.get("extra", 32)),
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Artifact writers
# ---------------------------------------------------------------------------

def function_rows(f: PiecewiseFn, n: int = 257) -> list[tuple[float, float, float]]:
    """(x, lower, upper) samples: uniform grid, breakpoints, and midpoints."""
    a, b = f.domain
    xs = {a + k * (b - a) / (n - 1) for k in range(n)}
    xs.update(f.breakpoints)
    for j in range(len(f.pieces)):
        xs.add(0.5 * (f.breakpoints[j] + f.breakpoints[j + 1]))
    rows = []
    for x in sorted(xs):
        if x <= a:
            lo, hi = _aff(f.pieces[0].lower, a), _aff(f.pieces[0].upper, a)
        elif x >= b:
            lo, hi = _aff(f.pieces[-1].lower, b), _aff(f.pieces[-1].upper, b)
        else:
            v = f.eval(x)
            lo, hi = v.lo, v.hi
        rows.append((x, lo, hi))
    return rows


def _write_function_csv(path: str, named: list[tuple[str, PiecewiseFn]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("function,x,lower,upper\n")
        for name, f in named:
            for x, lo, hi in function_rows(f):
                fh.write(f"{name},{x!r},{lo!r},{hi!r}\n")


def _write_segments_csv(path: str, named: list[tuple[str, PiecewiseFn]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("set,x1,y1,x2,y2\n")
        for name, f in named:
            for x1, y1, x2, y2 in graph_of(f).csv_rows():
                fh.write(f"{name},{x1!r},{y1!r},{x2!r},{y2!r}\n")


def _write_grid_csv(path: str, g: GridFn) -> None:
    xs = g.xs()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,lower,upper\n")
        for i in range(g.n):
            fh.write(f"{xs[i]!r},{g.lo[i]!r},{g.hi[i]!r}\n")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _render(svg: str, named: list[tuple[str, PiecewiseFn]],
            title: str) -> None:
    from . import plotting

    plotting.render_functions(named, svg, title)


# ---------------------------------------------------------------------------
# Task runners
# ---------------------------------------------------------------------------

def _report_header(task: str, seed: int) -> dict:
    return {"task": task, "seed": seed}


def _print_verification(rep: VerificationReport, heading: str) -> None:
    print(heading)
    print(rep.summary())


def run_task(task: str, doc: dict, seed: int, out: str | None,
             csv: str | None, svg: str | None,
             overrides: dict | None = None) -> int:
    if task not in TASKS:
        raise InputError(f"unknown task {task!r}")
    doc_task = doc.get("task")
    if doc_task is not None and doc_task != task:
        raise InputError(
            f"document task {doc_task!r} does not match requested {task!r}")
    overrides = overrides or {}
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise InputError("'params' must be an object")
    functions = _doc_functions(doc)
    report = _report_header(task, seed)
    named: list[tuple[str, PiecewiseFn]] = []
    status = 0

    if task in ("check-hcont", "envelope", "complete"):
        name = params.get("function")
        f = _get_fn(functions, name, "params.function")
        named.append((str(name), f))
        if task == "check-hcont":
            s_cont = f.is_s_continuous()
            lower, upper = f.lower_part(), f.upper_part()
            swap_up = lower.upper_envelope().equals(upper)
            swap_down = upper.lower_envelope().equals(lower)
            verdict = s_cont and swap_up and swap_down
            report.update({
                "verdict": verdict,
                "s_continuous": s_cont,
                "usc_envelope_of_lower_equals_upper": swap_up,
                "lsc_envelope_of_upper_equals_lower": swap_down,
            })
            print(f"hausdorff-continuous: {'PASS' if verdict else 'FAIL'}")
            print(f"  graph completion fixed point: "
                  f"{'yes' if s_cont else 'NO'}")
            print(f"  usc envelope of lower bound equals upper bound: "
                  f"{'yes' if swap_up else 'NO'}")
            print(f"  lsc envelope of upper bound equals lower bound: "
                  f"{'yes' if swap_down else 'NO'}")
            status = 0 if verdict else 1
        else:
            if task == "envelope":
                kind = params.get("kind", "upper")
                if kind == "upper":
                    result = f.upper_envelope()
                elif kind == "lower":
                    result = f.lower_envelope()
                else:
                    raise InputError("params.kind must be 'lower' or 'upper'")
                label = f"{kind} envelope"
            else:
                result = f.graph_completion()
                label = "graph completion"
            result = result.canonical()
            named.append((label, result))
            report["result_function"] = result.to_json()
            print(f"{label} of {name!r}: {len(result.pieces)} piece(s)")

    elif task == "distance":
        pair = params.get("functions")
        if not isinstance(pair, list) or len(pair) != 2:
            raise InputError("params.functions must name two functions")
        norm = overrides.get("norm") or params.get("norm", "euclid")
        if norm not in NORMS:
            raise InputError(f"norm must be one of {NORMS}")
        f = _get_fn(functions, pair[0], "params.functions[0]")
        g = _get_fn(functions, pair[1], "params.functions[1]")
        # the distance is between completed graphs; render those
        named = [(str(pair[0]), f.graph_completion()),
                 (str(pair[1]), g.graph_completion())]
        value = hausdorff_distance(f, g, norm=norm)
        report.update({"norm": norm, "distance": value, "verdict": True})
        print(f"hausdorff distance ({norm}): {value!r}")

    elif task in ("lattice-sup", "lattice-inf"):
        family = params.get("family")
        if not isinstance(family, list) or not family:
            raise InputError("params.family must be a nonempty list of names")
        fs = [_get_fn(functions, nm, "params.family") for nm in family]
        named = [(str(nm), f) for nm, f in zip(family, fs)]
        result = lattice_sup(fs) if task == "lattice-sup" else lattice_inf(fs)
        named.append(("supremum" if task == "lattice-sup" else "infimum",
                      result))
        report["result_function"] = result.to_json()
        print(f"{task} over {len(fs)} function(s): "
              f"{len(result.pieces)} piece(s)")

    elif task in ("verify-sub", "verify-super", "verify-solution"):
        ham = _get_phi(doc, overrides.get("phi"))
        name = params.get("function")
        f = _get_fn(functions, name, "params.function")
        named.append((str(name), f))
        cfg = _sample_config(params, seed)
        if task == "verify-sub":
            rep = verify_subsolution(f, ham, cfg)
            heading = f"viscosity subsolution check for {name!r}"
        elif task == "verify-super":
            rep = verify_supersolution(f, ham, cfg)
            heading = f"viscosity supersolution check for {name!r}"
        else:
            rep = verify_interval_solution(f, ham, cfg)
            heading = f"interval viscosity solution check for {name!r}"
        _print_verification(rep, heading)
        if task == "verify-solution":
            print(f"interval viscosity solution: "
                  f"{'PASS' if rep.verdict else 'FAIL'}")
        report.update({"phi": ham.to_string(), "verdict": rep.verdict,
                       "report": rep.to_json()})
        status = 0 if rep.verdict else 1

    elif task == "verify-envelope":
        ham = _get_phi(doc, overrides.get("phi"))
        u = _get_fn(functions, params.get("u"), "params.u")
        z1_names = params.get("z1")
        z2_names = params.get("z2")
        if not isinstance(z1_names, list) or not isinstance(z2_names, list):
            raise InputError("params.z1 and params.z2 must be lists of names")
        z1 = [_get_fn(functions, nm, "params.z1") for nm in z1_names]
        z2 = [_get_fn(functions, nm, "params.z2") for nm in z2_names]
        named = [(str(params.get("u")), u)]
        cfg = _sample_config(params, seed)
        rep = verify_envelope_solution(u, z1, z2, ham, cfg)
        _print_verification(rep, f"envelope solution check for "
                                 f"{params.get('u')!r}")
        report.update({"phi": ham.to_string(), "verdict": rep.verdict,
                       "report": rep.to_json()})
        status = 0 if rep.verdict else 1

    elif task == "solve":
        ham = _get_phi(doc, overrides.get("phi"))
        lower_name = overrides.get("lower_name") or params.get("lower")
        upper_name = overrides.get("upper_name") or params.get("upper")
        if "lower_fn" in overrides:
            u1 = overrides["lower_fn"]
            lower_name = lower_name or "lower"
        else:
            u1 = _get_fn(functions, lower_name, "params.lower")
        if "upper_fn" in overrides:
            u2 = overrides["upper_fn"]
            upper_name = upper_name or "upper"
        else:
            u2 = _get_fn(functions, upper_name, "params.upper")
        nodes = int(overrides.get("nodes") or params.get("nodes", 101))
        cfg = SolveConfig(
            residual_tol=float(overrides.get("residual_tol")
                               or params.get("residual_tol", 1e-8)),
            max_iters=int(overrides.get("max_iters")
                          or params.get("max_iters", 20000)),
            seed=seed,
        )
        named = [(str(lower_name), u1), (str(upper_name), u2)]
        try:
            grid, trace = perron_solve(ham, u1, u2, nodes, cfg)
        except NonConvergenceError as exc:
            trace = exc.trace
            report.update({
                "phi": ham.to_string(), "verdict": False, "nodes": nodes,
                "termination": trace.termination,
                "iterations": trace.iterations,
                "final_residual": trace.final_residual,
            })
            print(f"solve: FAIL ({trace.termination}) after "
                  f"{trace.iterations} iteration(s), residual "
                  f"{trace.final_residual:g}")
            if overrides.get("trace"):
                _write_json(overrides["trace"], trace.to_json())
            _write_outputs(report, named, None, out, csv, svg,
                           f"solve: {ham.to_string()}")
            return 1
        report.update({
            "phi": ham.to_string(), "verdict": True, "nodes": nodes,
            "termination": trace.termination,
            "iterations": trace.iterations,
            "final_residual": trace.final_residual,
            "solution": grid.to_json(),
        })
        print(f"solve: converged after {trace.iterations} iteration(s), "
              f"residual {trace.final_residual:g}, {nodes} nodes")
        print(f"  bumps accepted: "
              f"{sum(1 for r in trace.records if getattr(r, 'kind', '') == 'bump' and r.accepted)}"
              f", sweep stages: "
              f"{sum(1 for r in trace.records if getattr(r, 'kind', '') == 'sweep')}")
        if overrides.get("trace"):
            _write_json(overrides["trace"], trace.to_json())
        if csv:
            _write_grid_csv(csv, grid)
        if out:
            _write_json(out, report)
        if svg:
            from . import plotting

            plotting.render_solution(grid, named, svg,
                                     f"solve: {ham.to_string()}")
        return 0

    _write_outputs(report, named, task, out, csv, svg, task)
    return status


def _write_outputs(report: dict, named: list[tuple[str, PiecewiseFn]],
                   task: str | None, out: str | None, csv: str | None,
                   svg: str | None, title: str) -> None:
    if out:
        _write_json(out, report)
    if csv:
        if task == "distance":
            _write_segments_csv(csv, named)
        else:
            _write_function_csv(csv, named)
    if svg and named:
        _render(svg, named, title)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hjvisc",
        description="interval-valued viscosity-solution toolkit",
    )
    sub = parser.add_subparsers(dest="task", required=True, metavar="task")
    for task in TASKS:
        sp = sub.add_parser(task)
        sp.add_argument("--in", dest="doc", metavar="DOC.json",
                        help="problem document")
        sp.add_argument("--out", metavar="REPORT.json")
        sp.add_argument("--csv", metavar="OUT.csv")
        sp.add_argument("--svg", metavar="OUT.svg")
        sp.add_argument("--seed", type=int, default=0)
        if task == "distance":
            sp.add_argument("--norm", choices=NORMS)
        if task in ("verify-sub", "verify-super", "verify-solution",
                    "verify-envelope", "solve"):
            sp.add_argument("--phi", help="Hamiltonian expression override")
        if task == "solve":
            sp.add_argument("--lower", metavar="FILE",
                            help="lower bracket as a function JSON file")
            sp.add_argument("--upper", metavar="FILE")
            sp.add_argument("--nodes", type=int)
            sp.add_argument("--residual-tol", type=float, dest="residual_tol")
            sp.add_argument("--max-iters", type=int, dest="max_iters")
            sp.add_argument("--trace", metavar="TRACE.json")
    return parser


def _load_function_file(path: str) -> PiecewiseFn:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return PiecewiseFn.from_json(json.load(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except (json.JSONDecodeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc: dict = {}
        if args.doc:
            doc = load_doc(args.doc)
        overrides: dict = {}
        for key in ("phi", "norm", "nodes", "residual_tol", "max_iters",
                    "trace"):
            if getattr(args, key, None) is not None:
                overrides[key] = getattr(args, key)
        if getattr(args, "lower", None):
            overrides["lower_fn"] = _load_function_file(args.lower)
        if getattr(args, "upper", None):
            overrides["upper_fn"] = _load_function_file(args.upper)
        return run_task(args.task, doc, args.seed, args.out, args.csv,
                        args.svg, overrides)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
