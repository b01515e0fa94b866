"""Batch command line: parameter grids in, JSON (or CSV) reports out.

Exit status depends only on the verdicts: 0 when every report is
certified/matched (or a plain measurement), 1 on any definite failure, 2 when
something is inconclusive, 64 for a malformed job.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import platform
import socket
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version

from .certifier import (
    HypothesisError,
    certify_drip,
    certify_h1_quadruple,
    certify_h1_triples,
    certify_weak_3O,
    gate_drip,
    gate_quadruple,
    gate_triples,
    gate_weak_3O,
)
from .domains import SECOND_PRIME, default_prime
from .forms import Params
from .interp import generic_rank_certificate
from .lab import fit, local_identifiability, plant
from .schema import SCHEMA_VERSION, report_schema, validate_document
from .schemes import parse_kinds
from .tangent import join_dimension_sigma, join_dimension_tau

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 64
WORKERS_ENV = "TAUCERT_WORKERS"
COMMANDS = ("dims", "h1", "certify", "unique")
LEMMAS = ("triples", "quadruple", "weak3o", "custom")

_OK = {"certified", "matched", "computed"}
_FAIL = {"failed", "red_alert"}


class JobError(ValueError):
    """A job specification that cannot be run."""


def tool_version() -> str:
    try:
        return version("taucert")
    except PackageNotFoundError:  # running from a source tree
        from . import __version__

        return __version__


# ----------------------------------------------------------------------
# job specs


def parse_range(value) -> list[int]:
    """``7`` / ``"2..4"`` / ``"3,7,14"`` / ``[3, 7]`` -> sorted-as-given integers."""
    if isinstance(value, bool):
        raise JobError(f"bad range {value!r}")
    if isinstance(value, int):
        return [value]
    if isinstance(value, list):
        return [v for item in value for v in parse_range(item)]
    if not isinstance(value, str) or not value.strip():
        raise JobError(f"bad range {value!r}")
    out = []
    try:
        for part in value.split(","):
            if ".." in part:
                lo, hi = (int(x) for x in part.split(".."))
                if hi < lo:
                    raise JobError(f"empty range {part!r}")
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
    except ValueError as exc:
        raise JobError(f"bad range {value!r}") from exc
    return out


def parse_grid_tokens(tokens: list[str]) -> dict:
    grid = {}
    for tok in tokens:
        key, sep, val = tok.partition("=")
        if not sep or key not in ("m", "d", "t"):
            raise JobError(f"grid entries look like m=2..3, got {tok!r}")
        grid[key] = val
    return grid


def normalize_job(raw: dict) -> dict:
    """Validate a job dictionary and fill defaults; the result is JSON-clean."""
    if not isinstance(raw, dict):
        raise JobError("a job must be a JSON object")
    known = {
        "command", "grid", "trials", "seed", "prime", "output", "format", "lemma", "scheme",
        "restarts", "instances", "allow_out_of_range", "enumerate_sing",
    }
    unknown = set(raw) - known
    if unknown:
        raise JobError(f"unknown job fields: {sorted(unknown)}")
    command = raw.get("command")
    if command not in COMMANDS:
        raise JobError(f"command must be one of {COMMANDS}")
    grid = raw.get("grid") or {}
    if not isinstance(grid, dict) or set(grid) - {"m", "d", "t"}:
        raise JobError("grid keys are m, d, t")
    axes = {k: parse_range(v) for k, v in grid.items()}
    for key in ("m", "d"):
        if key not in axes:
            raise JobError(f"missing {key}")
    lemma = raw.get("lemma")
    needs_t = command in ("dims", "certify", "unique") or lemma == "weak3o"
    if needs_t and "t" not in axes:
        raise JobError(f"{command} needs t")
    job = {
        "command": command,
        "grid": {k: axes[k] for k in ("m", "d", "t") if k in axes},
        "trials": int(raw.get("trials", 5)),
        "seed": int(raw.get("seed", 0)),
        "prime": int(raw["prime"]) if raw.get("prime") is not None else default_prime(),
        "output": raw.get("output"),
        "format": raw.get("format", "json"),
        "allow_out_of_range": bool(raw.get("allow_out_of_range", False)),
    }
    if job["trials"] < 1:
        raise JobError("trials must be >= 1")
    if job["format"] not in ("json", "csv"):
        raise JobError("format must be json or csv")
    if command == "h1":
        if lemma not in LEMMAS:
            raise JobError(f"h1 needs --lemma in {LEMMAS}")
        job["lemma"] = lemma
        if lemma == "custom":
            scheme = raw.get("scheme")
            if not scheme:
                raise JobError("--lemma custom needs --scheme")
            try:
                parse_kinds(scheme)
            except ValueError as exc:
                raise JobError(str(exc)) from exc
            job["scheme"] = scheme
    if command == "certify":
        job["enumerate_sing"] = raw.get("enumerate_sing")
    if command == "unique":
        job["restarts"] = int(raw.get("restarts", 50))
        job["instances"] = int(raw.get("instances", 1))
        if job["restarts"] < 1 or job["instances"] < 1:
            raise JobError("restarts and instances must be >= 1")
    return job


def expand(job: dict) -> list[dict]:
    """Cartesian product of the grid, in deterministic order, one cell per job."""
    keys = list(job["grid"])
    cells = []
    for values in itertools.product(*(job["grid"][k] for k in keys)):
        cell = dict(zip(keys, values))
        cell["seed"] = job["seed"]
        cells.append(cell)
    return cells


def _check_gates(job: dict, cells: list[dict]) -> None:
    if job["allow_out_of_range"]:
        return
    command, lemma = job["command"], job.get("lemma")
    try:
        for c in cells:
            if command in ("certify", "unique"):
                gate_drip(c["m"], c["d"], c["t"])
            elif command == "h1" and lemma == "triples":
                gate_triples(c["m"], c["d"])
            elif command == "h1" and lemma == "quadruple":
                gate_quadruple(c["m"], c["d"])
            elif command == "h1" and lemma == "weak3o":
                gate_weak_3O(c["m"], c["d"], c["t"])
    except HypothesisError as exc:
        raise JobError(f"{exc} (pass --allow-out-of-range to run anyway)") from exc


# ----------------------------------------------------------------------
# cell runners (module level so worker processes can pickle them)


def _run_dims(job, cell):
    m, d, t = cell["m"], cell["d"], cell["t"]
    p = Params(m, d)
    return [{
        "type": "DimsReport",
        "m": m,
        "d": d,
        "t": t,
        "tau_dim": join_dimension_tau(m, d, t, seed=cell["seed"], prime=job["prime"]),
        "sigma_dim": join_dimension_sigma(m, d, t, seed=cell["seed"], prime=job["prime"]),
        "expected_tau": p.expected_dim_tau(t),
        "expected_sigma": p.expected_dim_sigma(t),
        "verdict": "computed",
    }]


def _run_h1(job, cell):
    m, d, lemma = cell["m"], cell["d"], job["lemma"]
    common = {"trials": job["trials"], "seed": cell["seed"], "prime": job["prime"]}
    flag = {"allow_out_of_range": job["allow_out_of_range"]}
    if lemma == "triples":
        certs = certify_h1_triples(m, d, **common, **flag)
    elif lemma == "quadruple":
        certs = [certify_h1_quadruple(m, d, **common, **flag)]
    elif lemma == "weak3o":
        certs = [certify_weak_3O(m, d, cell["t"], **common, **flag)]
    else:
        certs = [generic_rank_certificate(
            job["scheme"], m, d, second_prime=SECOND_PRIME, label="custom", t=cell.get("t"), **common
        )]
    return [c.to_dict() for c in certs]


def _run_certify(job, cell):
    report = certify_drip(
        cell["m"], cell["d"], cell["t"], trials=job["trials"], seed=cell["seed"], prime=job["prime"],
        allow_out_of_range=job["allow_out_of_range"], enumerate_sing=job.get("enumerate_sing"),
    )
    return [report.to_dict()]


def _run_unique(job, cell):
    m, d, t = cell["m"], cell["d"], cell["t"]
    out = []
    for i in range(job["instances"]):
        plant_seed = cell["seed"] + i
        inst = plant(m, d, t, plant_seed, allow_out_of_range=job["allow_out_of_range"])
        result = fit(inst.f_float, t, restarts=job["restarts"], seed=plant_seed, reference=inst.theta, m=m, d=d)
        report = result.to_dict()
        report["plant_seed"] = plant_seed
        report["plant"] = [list(L) for L in inst.forms]
        report["locally_identifiable"] = local_identifiability(inst)
        out.append(report)
    return out


_RUNNERS = {"dims": _run_dims, "h1": _run_h1, "certify": _run_certify, "unique": _run_unique}


def _run_cell(args):
    job, cell = args
    start = time.perf_counter()
    reports = _RUNNERS[job["command"]](job, cell)
    return reports, time.perf_counter() - start


def worker_count() -> int:
    value = os.environ.get(WORKERS_ENV)
    try:
        return max(1, int(value)) if value else 1
    except ValueError as exc:
        raise JobError(f"{WORKERS_ENV} must be an integer") from exc


def exit_code(verdicts: list[str]) -> int:
    if any(v in _FAIL for v in verdicts):
        return EXIT_FAIL
    if any(v not in _OK for v in verdicts):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def run(job: dict, workers: int | None = None) -> tuple[dict, int]:
    """Run a normalized job; returns the report document and its exit code."""
    cells = expand(job)
    _check_gates(job, cells)
    workers = worker_count() if workers is None else workers
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    tasks = [(job, c) for c in cells]
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
            results = list(pool.map(_run_cell, tasks))  # map keeps submission order
    else:
        results = [_run_cell(task) for task in tasks]
    reports = [r for rs, _ in results for r in rs]
    verdicts = [r["verdict"] for r in reports]
    code = exit_code(verdicts)
    counts = {v: verdicts.count(v) for v in sorted(set(verdicts))}
    doc = {
        "schema_version": SCHEMA_VERSION,
        "tool": "taucert",
        "version": tool_version(),
        "command": job["command"],
        "job": {k: v for k, v in job.items() if k not in ("output", "format")},
        "reports": reports,
        "summary": {"exit_code": code, "verdicts": counts},
        "meta": {
            "started": started.isoformat(),
            "finished": datetime.now(timezone.utc).isoformat(),
            "host": socket.gethostname(),
            "platform": platform.platform(),
            "python": platform.python_version(),
            "workers": workers,
            "wall_time": time.perf_counter() - t0,
            "cells": [{**cell, "wall_time": wt} for cell, (_, wt) in zip(cells, results)],
        },
    }
    validate_document(doc)
    return doc, code


# ----------------------------------------------------------------------
# output


CSV_FIELDS = (
    "command", "type", "label", "m", "d", "t", "seed", "verdict", "rank", "expected_rank",
    "scheme_degree", "tau_dim", "sigma_dim", "expected_tau", "expected_sigma",
    "converged_count", "matched_count", "restarts",
)


def to_csv(doc: dict) -> str:
    """One row per report, with the verdict column always present."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for r in doc["reports"]:
        row = {k: r.get(k, "") for k in CSV_FIELDS}
        row["command"] = doc["command"]
        if r["type"] == "Certificate":
            row["rank"] = r["achieved_rank"]
            row["seed"] = r["seeds"][0][0] if r["seeds"] else ""
        elif r["type"] == "RecoveryResult":
            row["seed"] = r.get("plant_seed", r["seed"])
        writer.writerow(row)
    return buf.getvalue()


def dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".taucert-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(doc: dict, job: dict, stream=None) -> None:
    text = to_csv(doc) if job["format"] == "csv" else dump_json(doc)
    if job.get("output"):
        write_atomic(job["output"], text)
    else:
        (stream or sys.stdout).write(text)


# ----------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="taucert", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {tool_version()}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, t_required=False):
        p.add_argument("--m", help="ambient dimension; 2, 2..4 or 2,5")
        p.add_argument("--d", help="degree (same range syntax)")
        p.add_argument("--t", help="number of summands (same range syntax)")
        p.add_argument("--grid", nargs="+", metavar="KEY=RANGE", help="e.g. m=2..3 d=7 t=3..5")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--prime", type=int, default=None, help="default: $TAUCERT_PRIME or 2^31-1")
        p.add_argument("--output", "-o", help="write here (atomically) instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--allow-out-of-range", action="store_true", help="run outside the hypothesis range")

    p = sub.add_parser("dims", help="Terracini dimensions of the tangential and secant joins")
    common(p)
    p = sub.add_parser("h1", help="h^1 vanishing certificates for fat-point schemes")
    common(p)
    p.add_argument("--lemma", choices=LEMMAS, required=True)
    p.add_argument("--scheme", help='custom scheme, e.g. "3P,2P*7"')
    p.add_argument("--trials", type=int, default=5)
    p = sub.add_parser("certify", help="drip-defectivity reports over a grid")
    common(p)
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--no-enumerate", dest="enumerate_sing", action="store_false", default=None,
                   help="skip the plane-curve singular-locus enumeration")
    p = sub.add_parser("unique", help="planted-decomposition recovery experiments")
    common(p)
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--instances", type=int, default=1, help="plants with seeds seed, seed+1, ...")
    p = sub.add_parser("schema", help="print the report JSON schema")
    p.add_argument("--output", "-o")
    p = sub.add_parser("run", help="run a JSON job file")
    p.add_argument("--job", required=True, help="path to the job file")
    return parser


def job_from_args(ns: argparse.Namespace) -> dict:
    raw = {"command": ns.command, "seed": ns.seed, "prime": ns.prime, "output": ns.output,
           "format": ns.format, "allow_out_of_range": ns.allow_out_of_range}
    grid = parse_grid_tokens(ns.grid) if ns.grid else {}
    for key in ("m", "d", "t"):
        val = getattr(ns, key)
        if val is not None:
            if key in grid:
                raise JobError(f"{key} given both as --{key} and in --grid")
            grid[key] = val
    raw["grid"] = grid
    for key in ("trials", "lemma", "scheme", "restarts", "instances", "enumerate_sing"):
        if getattr(ns, key, None) is not None:
            raw[key] = getattr(ns, key)
    return normalize_job(raw)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        if ns.command == "schema":
            text = json.dumps(report_schema(), indent=2, sort_keys=True) + "\n"
            if ns.output:
                write_atomic(ns.output, text)
            else:
                sys.stdout.write(text)
            return EXIT_OK
        if ns.command == "run":
            try:
                with open(ns.job) as fh:
                    raw = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise JobError(f"cannot read job file: {exc}") from exc
            job = normalize_job(raw)
        else:
            job = job_from_args(ns)
        doc, code = run(job)
    except JobError as exc:
        print(f"taucert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    emit(doc, job)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
