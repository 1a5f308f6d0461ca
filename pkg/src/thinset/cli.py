"""Command-line front end: ``thinset <subcommand> [options]``.

Every run prints (or writes) one JSON report:

    {"tool", "version", "config", "results": [{"name", "value", "label", ...}],
     "provenance", "wall_time"}

Labels are "exact", "certified-lower-bound" or "estimate".  Malformed input
exits with status 2, library errors with status 3; both print a JSON error
object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .errors import ThinsetError

EXACT = "exact"
LOWER = "certified-lower-bound"
ESTIMATE = "estimate"


class InputError(Exception):
    """Malformed command-line input (exit status 2)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _load_json(text: str):
    """Inline JSON, or the contents of a file when ``text`` names one."""
    if text is None:
        raise InputError("missing JSON input")
    try:
        if os.path.exists(text):
            with open(text) as fh:
                return json.load(fh)
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON from {text!r}: {exc}") from exc


def _freqset(args, text=None):
    from .spectrum import FreqSet, GroupSpec

    data = _load_json(text if text is not None else args.set)
    group = GroupSpec.parse(args.group) if getattr(args, "group", None) else None
    if not isinstance(data, (list, dict)):
        raise InputError("a frequency set is a JSON list or {group, elements} object")
    return FreqSet.from_json(data, group)


def _clean(x):
    """JSON-safe copy with numpy types converted."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _result(name, value, label, **extra):
    return {"name": name, "value": value, "label": label, **extra}


# subcommand handlers return (results, provenance notes)

def cmd_relations(args):
    from .relations import Greedy, RandomThinning, extract_quasi_independent, relation_count

    A = _freqset(args)
    report = relation_count(A, cap=args.cap, keep_witnesses=args.witnesses)
    results = [
        _result("count", report.count, EXACT),
        _result("quasi_independent", report.quasi_independent, EXACT),
    ]
    if args.witnesses:
        results.append(_result("witnesses", [list(c.signs) for c in report.certificates], EXACT))
    if args.extract != "none":
        strategy = Greedy() if args.extract == "greedy" else RandomThinning(args.delta, args.seed)
        ex = extract_quasi_independent(A, strategy, cap=args.cap)
        extra = {"seed": args.seed} if args.extract == "random" else {}
        results.append(_result("extracted", ex.subset.to_json(), EXACT, **extra))
    return results, ["relations counted by meet-in-the-middle over {-1,0,1} sign vectors"]


def cmd_matroid(args):
    from .matroid import FailureWitness, GFVectorSet, horn_rado_partition

    vectors = _load_json(args.vectors)
    if not isinstance(vectors, list) or not vectors:
        raise InputError("vectors must be a nonempty JSON list of lists")
    V = GFVectorSet.of(args.p, vectors)
    out = horn_rado_partition(V, args.k)
    if isinstance(out, FailureWitness):
        results = [_result("partition_exists", False, EXACT), _result("witness", out.to_json(), EXACT)]
    else:
        results = [_result("partition_exists", True, EXACT), _result("partition", out.parts, EXACT)]
    return results, ["partition by shortest exchange paths; parts and witnesses re-verified by rank"]


def _distribution(text):
    from .subgauss import DiscreteDistribution, named_distribution

    try:
        return named_distribution(text)
    except ThinsetError:
        pass
    data = _load_json(text)
    if isinstance(data, dict) and "values" in data:
        return DiscreteDistribution(data["values"], data.get("probs"))
    if isinstance(data, list):
        return DiscreteDistribution(data)
    raise InputError("distribution must be a built-in name or {values, probs}")


def _system(text, grid):
    from .subgauss import FunctionSystem

    data = _load_json(text)
    if isinstance(data, dict) and "freqs" in data:
        return FunctionSystem.characters(data["freqs"], int(data.get("grid", grid)))
    if isinstance(data, dict) and "rademacher" in data:
        return FunctionSystem.rademacher(int(data["rademacher"]))
    if isinstance(data, dict) and "matrix" in data:
        return FunctionSystem(np.array(data["matrix"], dtype=complex if _has_complex(data["matrix"]) else float),
                              data.get("weights"))
    if isinstance(data, list):
        return FunctionSystem.characters(data, grid)
    raise InputError("system must be a frequency list, {freqs, grid}, {rademacher: n} or {matrix, weights}")


def _has_complex(rows) -> bool:
    return any(isinstance(v, list) for row in rows for v in row)


def cmd_sg(args):
    from .subgauss import sg_constant, sg_system_lower

    if args.system:
        est = sg_system_lower(_system(args.system, args.grid), restarts=args.restarts, seed=args.seed)
        return [_result("sg_lower", est.value, LOWER, direction=est.direction, restarts=est.restarts,
                        seed=args.seed)], [
            "maximization over the coefficient sphere by seeded coordinate rotations; "
            "any direction's constant bounds the system constant from below"]
    if args.dist:
        f = _distribution(args.dist)
        return [_result("sg", sg_constant(f), LOWER)], [
            "max of sqrt(Var) and sqrt(2 log E e^{lambda f})/|lambda| over a finite lambda grid"]
    raise InputError("sg needs --system or --dist")


def cmd_psi(args):
    from .subgauss import psi_norm

    f = _distribution(args.dist)
    return [_result("psi_norm", psi_norm(f, args.a), EXACT, a=args.a)], [
        "root of E exp(|f/t|^a) = e on an exact finite distribution"]


def cmd_riesz(args):
    from .riesz import coefficient_law_error, expansion_error, riesz_product

    A = _freqset(args)
    n = len(A)
    if args.phases == "ones":
        z = np.ones(n, dtype=complex)
    elif args.phases == "random":
        z = np.exp(2j * np.pi * np.random.default_rng(args.seed).random(n))
    else:
        raw = _load_json(args.phases)
        z = np.array([complex(*v) if isinstance(v, list) else complex(v) for v in raw])
    F = riesz_product(A, z, M=args.grid)
    vals = F.samples.values
    results = [
        _result("mean", float(vals.real.mean()), EXACT),
        _result("min", float(vals.real.min()), EXACT),
        _result("expansion_error", expansion_error(F), EXACT),
    ]
    if n <= 12:
        results.append(_result("coefficient_law_error", coefficient_law_error(F), EXACT))
    if args.phases == "random":
        for r in results:
            r["seed"] = args.seed
    return results, ["grid product; FFT coefficients compared with the exact expansion"]


def cmd_sidon(args):
    from .riesz import sidon_constant_search
    from .spectrum import GroupSpec

    group = GroupSpec.parse(args.group)
    data = _load_json(args.set)
    elems = data["elements"] if isinstance(data, dict) else data
    elems = [tuple(e) if isinstance(e, list) and group.is_vector else (e[0] if isinstance(e, list) else e)
             for e in elems]
    res = sidon_constant_search(group, elems, phase_samples=args.phase_samples, seed=args.seed, tol=args.tol)
    return [_result("sidon_lower", res.lower_bound, LOWER, evaluated=res.evaluated, seed=args.seed,
                    best_phases=[[c.real, c.imag] for c in np.asarray(res.best_phases, dtype=complex)])], [
        "each value is an L1 interpolation optimum with a dual certificate; the max over phases "
        "bounds the Sidon constant from below"]


def cmd_mehler(args):
    from .gaussian import tensor_decompose

    z = None if args.z is None else np.array(_load_json(args.z), dtype=float)
    t, r = tensor_decompose(args.n, args.delta, z, args.degree)
    return [
        _result("l1_norm_t", t.l1_norm, ESTIMATE, bound=2 / args.delta),
        _result("op_norm_r", r.op_norm_2to2, EXACT, bound=args.delta),
    ], ["L1 norm by Imhof inversion of chi-square tails (numerical quadrature)",
        "operator norm from the spectrum of the truncated coefficient matrix"]


def cmd_codes(args):
    from .codes import Lex, Random, counting_bound, exact_N, gv_greedy

    order = Lex() if args.order == "lex" else Random(seed=args.seed)
    fam = gv_greedy(args.n, args.m, args.k, order)
    results = [
        _result("gv_size", len(fam), LOWER, **({"seed": args.seed} if args.order == "random" else {})),
        _result("counting_bound", counting_bound(args.n, args.m, args.k), EXACT),
        _result("family", [list(w) for w in fam.words], EXACT),
    ]
    if args.exact:
        results.append(_result("N", exact_N(args.n, args.m, args.k), EXACT))
    return results, ["greedy maximal family; exact value by branch-and-bound maximum clique"]


def cmd_bmo(args):
    from .bmo import ArcFamily, Mean1, Psi, bmo_norm
    from .spectrum import TrigPoly, alias_free_grid, synth_eval

    data = _load_json(args.poly)
    if not isinstance(data, dict) or "coeffs" not in data:
        raise InputError("poly must be {group?, coeffs: [[k, re, im], ...]}")
    poly = TrigPoly.from_json(data)
    M = args.grid or alias_free_grid(poly.max_abs_freq())
    f = synth_eval(poly, M)
    flavor = args.flavor.lower()
    if flavor == "mean1":
        fl = Mean1()
    elif flavor.startswith("psi"):
        fl = Psi(float(flavor[3:] or 2))
    else:
        raise InputError(f"unknown flavor {args.flavor!r}")
    arcs = ArcFamily.dyadic(M) if args.arcs == "dyadic" else ArcFamily.all_grid(M)
    return [_result("bmo_norm", bmo_norm(f, fl, arcs), EXACT, grid=M, arcs=arcs.scheme)], [
        "exact supremum over the listed grid arcs of the discretized function"]


def cmd_net(args):
    from .subgauss import packing_net

    S = _system(args.system, args.grid)
    rep = packing_net(S, args.delta, args.s, args.C)
    return [_result("net", rep.to_json(), EXACT)], ["greedy maximal separated set of atoms"]


def cmd_entropy(args):
    from .subgauss import entropy_integral

    data = _load_json(args.set)
    elems = data["elements"] if isinstance(data, dict) else data
    elems = [e[0] if isinstance(e, list) else e for e in elems]
    return [_result("entropy_integral", entropy_integral(elems, args.grid), EXACT)], [
        "exact finite sum over the distinct distances of the step-function measure"]


HANDLERS = {
    "relations": cmd_relations, "matroid": cmd_matroid, "sg": cmd_sg, "psi": cmd_psi,
    "riesz": cmd_riesz, "sidon": cmd_sidon, "mehler": cmd_mehler, "codes": cmd_codes,
    "bmo": cmd_bmo, "net": cmd_net, "entropy": cmd_entropy,
}


def build_parser() -> argparse.ArgumentParser:
    from .relations import DEFAULT_CAP

    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--grid", type=int, default=None)
    common.add_argument("--cap", type=int, default=DEFAULT_CAP)
    common.add_argument("--tol", type=float, default=1e-6)
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=["json", "csv"], default="json")

    parser = _Parser(prog="thinset", description="thinset-lab command line")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("relations", parents=[common])
    p.add_argument("--set", required=True)
    p.add_argument("--group", default=None)
    p.add_argument("--witnesses", action="store_true")
    p.add_argument("--extract", choices=["none", "greedy", "random"], default="none")
    p.add_argument("--delta", type=float, default=1.0)

    p = sub.add_parser("matroid", parents=[common])
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("sg", parents=[common])
    p.add_argument("--system", default=None)
    p.add_argument("--dist", default=None)
    p.add_argument("--restarts", type=int, default=16)

    p = sub.add_parser("psi", parents=[common])
    p.add_argument("--dist", required=True)
    p.add_argument("--a", type=float, default=2.0)

    p = sub.add_parser("riesz", parents=[common])
    p.add_argument("--set", required=True)
    p.add_argument("--group", default=None)
    p.add_argument("--phases", default="ones")

    p = sub.add_parser("sidon", parents=[common])
    p.add_argument("--group", required=True)
    p.add_argument("--set", required=True)
    p.add_argument("--phase-samples", type=int, default=None)

    p = sub.add_parser("mehler", parents=[common])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--degree", type=int, default=8)
    p.add_argument("--z", default=None)
    p.add_argument("--report", default=None, help="alias for --out")

    p = sub.add_parser("codes", parents=[common])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--order", choices=["lex", "random"], default="lex")

    p = sub.add_parser("bmo", parents=[common])
    p.add_argument("--poly", required=True)
    p.add_argument("--flavor", default="mean1")
    p.add_argument("--arcs", choices=["dyadic", "all"], default="dyadic")

    p = sub.add_parser("net", parents=[common])
    p.add_argument("--system", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--C", type=float, default=1.0)

    p = sub.add_parser("entropy", parents=[common])
    p.add_argument("--set", required=True)
    return parser


def _validate(args) -> None:
    if args.tol <= 0:
        raise InputError("--tol must be positive")
    if args.cap < 1:
        raise InputError("--cap must be at least 1")
    if args.grid is not None and args.grid < 1:
        raise InputError("--grid must be positive")
    if not 0 <= args.seed < 2**64:
        raise InputError("--seed must be a 64-bit unsigned integer")


def _csv(report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["name", "value", "label"])
    for r in report["results"]:
        value = r["value"]
        writer.writerow([r["name"], json.dumps(value) if isinstance(value, (list, dict)) else value, r["label"]])
    return buf.getvalue()


def _emit_error(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def run(argv=None) -> int:
    start = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        _validate(args)
        if args.command == "sg" and args.grid is None:
            args.grid = 1024
        results, notes = HANDLERS[args.command](args)
    except InputError as exc:
        return _emit_error("InputError", str(exc), 2)
    except ThinsetError as exc:
        return _emit_error(exc.name, str(exc), 3)
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "report", "format")}
    report = {
        "tool": "thinset-lab",
        "version": __version__,
        "config": config,
        "results": results,
        "provenance": notes,
        "wall_time": time.perf_counter() - start,
    }
    report = _clean(report)
    text = _csv(report) if args.format == "csv" else json.dumps(report, sort_keys=True, indent=2) + "\n"
    out = args.out or getattr(args, "report", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
