"""Batch front end: JSON job files in, JSON reports out.

Exit codes: 0 success, 2 schema or validation error, 3 invariant undefined,
4 internal cross-check failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import jsonschema

from . import agrarian as inv
from .fibration import FibrationHypothesisError, FibrationInput, evaluate as evaluate_fibration
from .groups import (
    PresentationSyntaxError,
    Representation,
    abelianize,
    chain_complex,
    make_character,
    parse_presentation,
)
from .polytopes import is_single

EXIT_OK, EXIT_INVALID, EXIT_UNDEFINED, EXIT_INTERNAL = 0, 2, 3, 4

TASKS = ("norm", "betti", "torsion", "polytope", "inequality", "fibration", "selftest")

_ENTRY = {"type": ["string", "integer"]}
_MATRIX = {"type": "array", "items": {"type": "array", "items": _ENTRY}}

JOB_SCHEMA = {
    "type": "object",
    "required": ["task"],
    "additionalProperties": False,
    "properties": {
        "task": {"enum": list(TASKS)},
        "group": {"type": "string"},
        "representation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dim": {"type": "integer", "minimum": 1},
                "matrices": {
                    "oneOf": [
                        {"type": "array", "items": _MATRIX},
                        {"type": "object", "additionalProperties": _MATRIX},
                    ]
                },
            },
        },
        "character": {
            "oneOf": [
                {"type": "array", "items": {"type": "integer"}},
                {"type": "object", "additionalProperties": {"type": "integer"}},
            ]
        },
        "fibered": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"fiber_rank": {"type": "integer", "minimum": 0}, "fiber_euler": {"type": "integer"}},
        },
        "fibration": {"type": "object"},
        "clause": {"type": "string"},
        "options": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "seed": {"type": "integer"},
                "caps": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"polytope": {"type": "integer", "minimum": 1}},
                },
                "cross_check": {"type": "boolean"},
            },
        },
    },
}


class JobError(Exception):
    def __init__(self, code: int, message: str, **extra):
        super().__init__(message)
        self.code = code
        self.extra = extra


def _require(job: dict, key: str):
    if key not in job:
        raise JobError(EXIT_INVALID, f"task {job['task']!r} needs field {key!r}")
    return job[key]


def _group(job: dict):
    text = _require(job, "group")
    try:
        return parse_presentation(text)
    except PresentationSyntaxError as exc:
        raise JobError(EXIT_INVALID, str(exc), position=exc.position) from None


def _representation(job: dict, p) -> Representation:
    spec = job.get("representation")
    if spec is None:
        return Representation.trivial(p)
    mats = spec.get("matrices")
    if mats is None:
        return Representation.trivial(p, spec.get("dim", 1))
    if isinstance(mats, dict):
        missing = [g for g in p.names if g not in mats]
        extra = [g for g in mats if g not in p.names]
        if missing or extra:
            raise JobError(EXIT_INVALID, f"representation generators: missing {missing}, unknown {extra}")
        mats = [mats[g] for g in p.names]
    dim = spec.get("dim")
    if dim is not None and any(len(m) != dim for m in mats):
        raise JobError(EXIT_INVALID, f"matrices must be {dim}x{dim}")
    return Representation(p, mats)


def _character(job: dict, p):
    vals = _require(job, "character")
    if isinstance(vals, dict):
        unknown = [g for g in vals if g not in p.names]
        if unknown:
            raise JobError(EXIT_INVALID, f"character names unknown generators {unknown}")
        vals = [vals.get(g, 0) for g in p.names]
    return make_character(p, vals)


def _run_task(job: dict, seed: int) -> tuple:
    """Return ``(results, provenance)`` for one validated job."""
    task = job["task"]
    opts = job.get("options", {})
    seed = opts.get("seed", seed)
    if task == "fibration":
        data = dict(_require(job, "fibration"))
        clause = job.get("clause", data.pop("clause", "bound"))
        inp = FibrationInput.from_json(data)
        rep = evaluate_fibration(inp, clause)
        return rep.to_json(), {"b2": rep.clause}
    if task == "selftest":
        return _selftest(), {"selftest": "built-in fixtures"}
    p = _group(job)
    sigma = _representation(job, p)
    q = abelianize(p)
    if task == "betti":
        C = chain_complex(p)
        b = inv.betti_numbers(C, sigma, q)
        return (
            {"betti": b.to_json(), "euler_characteristic": b.alternating_sum(), "n_times_chi": sigma.dim * C.euler_characteristic()},
            {"betti": "rank over K(X) of evaluated boundaries"},
        )
    if task == "torsion":
        C = chain_complex(p)
        t = inv.torsion(C, sigma, q, seed=seed)
        other = inv.torsion(C, sigma, q, strategy="last", seed=seed)
        agree = inv.pg_equal_up_to_translation(t.polytope, other.polytope)
        if not agree:
            raise JobError(EXIT_INTERNAL, "torsion polytope depends on the contraction")
        return (
            {"torsion": str(t.value), "polytope": t.polytope.to_json(), "strategy_agreement": agree},
            {"torsion": "determinant of d + gamma over K(X)"},
        )
    if task == "polytope":
        C = chain_complex(p)
        P = inv.torsion(C, sigma, q, seed=seed).polytope
        cap = opts.get("caps", {}).get("polytope")
        single, witness = is_single(P, cap)
        return (
            {"polytope": P.to_json(), "single": single, "witness": witness.to_json() if witness is not None else None},
            {"polytope": "Newton polytopes of torsion numerator and denominator"},
        )
    phi = _character(job, p)
    if task == "norm":
        if p.deficiency == 1:
            rep = inv.twisted_alexander_norm(p, sigma, phi, q, cross_check=opts.get("cross_check", True))
        else:
            rep = inv.agrarian_norm(chain_complex(p), sigma, phi, q)
        return rep.to_json(), {"norm": rep.provenance}
    if task == "inequality":
        rep = inv.check_inequality(p, sigma, phi, job.get("fibered"), q)
        return rep.to_json(), {"agrarian_norm": "twisted norm", "n_times_thurston": "n * (-chi(fiber))"}
    raise JobError(EXIT_INVALID, f"unknown task {task!r}")


def _selftest() -> dict:
    from .trees import RootedTree, tree_diamond

    out = {}
    tre = parse_presentation("<a,b | a b a b^-1 a^-1 b^-1>")
    phi = make_character(tre, [1, 1])
    out["trefoil_norm_is_1"] = inv.twisted_alexander_norm(tre, Representation.trivial(tre), phi, cross_check=True).value == 1
    z = parse_presentation("<t | >")
    tz = inv.torsion(chain_complex(z), Representation.trivial(z))
    out["circle_torsion_thickness_minus_1"] = inv.thickness(tz.polytope, (1,)) == -1
    zero = RootedTree.zero()
    out["diamond_of_zero_is_path_2"] = tree_diamond(zero) == zero.exp().exp()
    out["all_passed"] = all(out.values())
    return out


def run_job(job, index: int, source: str, seed: int, timing: bool) -> tuple:
    """Execute one job; returns ``(report, exit_code)``."""
    start = time.perf_counter()
    report = {"index": index, "source": source}
    try:
        if not isinstance(job, dict):
            raise JobError(EXIT_INVALID, "job must be a JSON object")
        try:
            jsonschema.validate(job, JOB_SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
            raise JobError(EXIT_INVALID, f"schema: {exc.message} at {where}") from None
        report["task"] = job["task"]
        results, provenance = _run_task(job, seed)
        report.update(status="ok", results=results, provenance=provenance)
        code = EXIT_OK
    except JobError as exc:
        report.update(status="error", error=str(exc), **exc.extra)
        code = exc.code
    except (inv.NotAcyclicError, inv.UndefinedInvariantError) as exc:
        report.update(status="undefined", error=str(exc))
        code = EXIT_UNDEFINED
    except inv.CrossCheckError as exc:
        report.update(status="internal_error", error=str(exc))
        code = EXIT_INTERNAL
    except (ValueError, KeyError, FibrationHypothesisError) as exc:
        report.update(status="error", error=str(exc))
        code = EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - report, never crash the batch
        report.update(status="internal_error", error=f"{type(exc).__name__}: {exc}")
        code = EXIT_INTERNAL
    report["exit_code"] = code
    if timing:
        report["timing_seconds"] = round(time.perf_counter() - start, 6)
    return report, code


def _load_jobs(path: str) -> list:
    """A job file holds one job object or a list of them."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise JobError(EXIT_INVALID, f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise JobError(EXIT_INVALID, f"{path}: invalid JSON: {exc.msg}", position=exc.pos) from None
    return data if isinstance(data, list) else [data]


def _star(args):
    return run_job(*args)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="agrarian", description="Twisted group invariants from JSON job files.")
    ap.add_argument("--job", action="append", required=True, metavar="FILE", help="job file (repeatable)")
    ap.add_argument("--out", default="-", metavar="FILE", help="report destination, '-' for stdout")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized pivot points")
    ap.add_argument("--jobs", type=int, default=1, metavar="N", help="parallel worker processes")
    ap.add_argument("--timing", action="store_true", help="add wall-clock timings (reports are then not byte-stable)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    tasks = []
    reports = []
    codes = []
    for path in args.job:
        try:
            jobs = _load_jobs(path)
        except JobError as exc:
            reports.append((len(tasks) + len(reports), {"source": path, "status": "error", "error": str(exc),
                                                        "exit_code": exc.code, **exc.extra}))
            codes.append(exc.code)
            continue
        for k, job in enumerate(jobs):
            tasks.append((job, None, f"{path}#{k}", args.seed, args.timing))
    order = len(reports)
    indexed = [(t[0], order + i, t[2], t[3], t[4]) for i, t in enumerate(tasks)]
    if args.jobs > 1 and len(indexed) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_star, indexed))
    else:
        results = [run_job(*t) for t in indexed]
    for rep, code in results:
        reports.append((rep["index"], rep))
        codes.append(code)
    reports.sort(key=lambda x: x[0])
    body = [r for _, r in reports]
    for i, r in enumerate(body):
        r["index"] = i
    text = json.dumps({"reports": body}, indent=2, sort_keys=True) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return max(codes, default=EXIT_OK)


if __name__ == "__main__":
    sys.exit(main())
