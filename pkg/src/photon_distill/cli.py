"""Batch front end: ``photon-distill {evaluate,sweep,search,verify}``.

Exit status: 0 on success, 1 when the config fails validation, 2 on a
numeric-integrity failure (a proven bound was violated, i.e. a bug).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import jsonschema
import numpy as np

from . import io
from .bounds import report_from_distribution
from .conditional import DetectionPattern, InputEnsemble, evaluate, improvement_verdict, pattern_table
from .errors import NumericIntegrityError, PhotonDistillError
from .search import SearchProblem, optimize, sweep_epsilon_scheme
from .unitary import (
    EpsilonSchemeSpec,
    GivensParameterization,
    Unitary,
    dft,
    epsilon_scheme,
    haar_random,
    realize,
)

COMMANDS = ("evaluate", "sweep", "search", "verify")
THREADS_ENV = "PHOTON_DISTILL_THREADS"
MAX_VERIFY_MODES = 8

_prob = {"type": "number", "minimum": 0, "maximum": 1}
_count = {"type": "integer", "minimum": 0}
_seed = {"type": "integer", "minimum": 0, "maximum": 2**64 - 1}
_matrix = {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}

UNITARY_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {"kind": {"enum": ["explicit", "epsilon_scheme", "dft", "haar", "givens"]}},
    "allOf": [
        {"if": {"properties": {"kind": {"const": "explicit"}}},
         "then": {"required": ["re"], "properties": {"re": _matrix, "im": _matrix, "dim": {"type": "integer"}}}},
        {"if": {"properties": {"kind": {"const": "epsilon_scheme"}}},
         "then": {"required": ["epsilon"],
                  "properties": {"epsilon": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}}}},
        {"if": {"properties": {"kind": {"const": "haar"}}},
         "then": {"properties": {"seed": _seed}}},
        {"if": {"properties": {"kind": {"const": "givens"}}},
         "then": {"required": ["angles", "phases"],
                  "properties": {"angles": {"type": "array", "items": {"type": "number"}},
                                 "phases": {"type": "array", "items": {"type": "number"}}}}},
    ],
}

SCHEMAS = {
    "evaluate": {
        "type": "object",
        "required": ["probs", "unitary", "pattern"],
        "properties": {
            "probs": {"type": "array", "items": _prob, "minItems": 2},
            "unitary": UNITARY_SCHEMA,
            "pattern": {"type": "array", "items": _count},
        },
    },
    "sweep": {
        "type": "object",
        "required": ["n_modes", "p", "detected", "epsilons"],
        "properties": {
            "n_modes": {"type": "integer", "minimum": 2},
            "p": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
            "detected": {"type": "integer", "minimum": 1},
            "epsilons": {"type": "array", "minItems": 1,
                         "items": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}},
        },
    },
    "search": {
        "type": "object",
        "required": ["probs", "objective", "budget"],
        "properties": {
            "probs": {"type": "array", "items": _prob, "minItems": 2, "maxItems": 8},
            "objective": {"enum": ["MAX_C1", "MAX_RATIO_10", "MAX_C1_CLEAN"]},
            "pattern_policy": {"enum": ["FIXED", "ENUMERATE_ALL"]},
            "pattern": {"type": ["array", "null"], "items": _count},
            "budget": {"type": "integer", "minimum": 1},
            "restarts": {"type": "integer", "minimum": 1},
            "cleanliness_tol": {"type": "number", "minimum": 0},
            "seed": _seed,
        },
    },
    "verify": {
        "type": "object",
        "required": ["n_modes", "trials"],
        "properties": {
            "n_modes": {"type": "integer", "minimum": 2, "maximum": MAX_VERIFY_MODES},
            "trials": {"type": "integer", "minimum": 1},
            "p_high": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
            "seed": _seed,
        },
    },
}


class ConfigError(PhotonDistillError, ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    payload: dict
    output_path: str
    format: str = "json"
    seed: int | None = None
    threads: int = 1

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"unknown format {self.format!r}")
        try:
            jsonschema.validate(self.payload, SCHEMAS[self.command])
        except jsonschema.ValidationError as exc:
            path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"{self.command} config invalid at {path}: {exc.message}") from None

    def effective_seed(self, default: int = 0) -> int:
        if self.seed is not None:
            return int(self.seed)
        return int(self.payload.get("seed", default))

    def digest(self) -> str:
        return io.digest({"command": self.command, "payload": self.payload,
                          "format": self.format, "seed": self.seed})


def build_unitary(desc: dict, n_modes: int, seed: int) -> Unitary:
    kind = desc["kind"]
    if kind == "explicit":
        u = Unitary.from_json(desc)
    elif kind == "epsilon_scheme":
        u = epsilon_scheme(EpsilonSchemeSpec(int(desc.get("n_modes", n_modes)), float(desc["epsilon"])))
    elif kind == "dft":
        u = dft(int(desc.get("dim", n_modes)))
    elif kind == "haar":
        u = haar_random(int(desc.get("dim", n_modes)), int(desc.get("seed", seed)))
    else:
        u = realize(GivensParameterization(int(desc.get("dim", n_modes)), tuple(desc["angles"]), tuple(desc["phases"])))
    if u.dim != n_modes:
        raise ConfigError(f"unitary has {u.dim} modes but {n_modes} probabilities were given")
    return u


def _run_evaluate(cfg: RunConfig) -> tuple[Any, list[str], list[list]]:
    p = cfg.payload
    ens = InputEnsemble(tuple(p["probs"]))
    u = build_unitary(p["unitary"], ens.n_modes, cfg.effective_seed())
    pattern = DetectionPattern(tuple(p["pattern"]))
    if pattern.n_modes != ens.n_modes:
        raise ConfigError(f"pattern must list {ens.n_modes - 1} detector counts")
    dist = evaluate(u, ens, pattern)
    verdict = improvement_verdict(dist, ens)
    report = report_from_distribution(dist, ens) if ens.odds is not None else None
    if report is not None and not report.satisfied:
        raise NumericIntegrityError(f"bound violated: {report.violations}")
    doc = {
        "unitary": u.to_json(),
        "distribution": dist.to_json(),
        "verdict": verdict.to_json(),
        "bound_report": None if report is None else report.to_json(),
    }
    header = ["n1", "coefficient", "herald_prob", "ratio_10", "ratio_21"]
    rows = [[n1, c, dist.herald_prob, dist.ratio_10, dist.ratio_21] for n1, c in enumerate(dist.coefficients)]
    return doc, header, rows


def _run_sweep(cfg: RunConfig):
    p = cfg.payload
    table = sweep_epsilon_scheme(int(p["n_modes"]), float(p["p"]), int(p["detected"]), p["epsilons"])
    header = ["epsilon", "ratio_10", "ratio_21", "herald_prob", "ratio_10_over_odds", "ratio_21_over_ratio_10"]
    rows = [[getattr(r, h) for h in header] for r in table]
    return {"rows": [r.to_json() for r in table]}, header, rows


def _search_problem(cfg: RunConfig) -> SearchProblem:
    p = cfg.payload
    ens = InputEnsemble(tuple(p["probs"]))
    policy = p.get("pattern_policy", "ENUMERATE_ALL" if p.get("pattern") is None else "FIXED")
    if policy == "FIXED" and p.get("pattern") is None:
        raise ConfigError("FIXED pattern policy needs a 'pattern'")
    pattern = DetectionPattern(tuple(p["pattern"])) if policy == "FIXED" else None
    return SearchProblem(
        n_modes=ens.n_modes,
        ensemble=ens,
        objective=p["objective"],
        budget=int(p["budget"]),
        seed=cfg.effective_seed(),
        pattern=pattern,
        restarts=int(p.get("restarts", 20)),
        cleanliness_tol=float(p.get("cleanliness_tol", 1e-9)),
    )


def _run_search(cfg: RunConfig):
    problem = _search_problem(cfg)
    result = optimize(problem, threads=cfg.threads)
    doc = {"problem": problem.to_json(), "result": result.to_json()}
    return doc, ["evaluation_index", "incumbent"], [[i, v] for i, v in result.trace]


def verify_trial(n_modes: int, p_high: float, seed: int, trial: int):
    """One random scenario: Haar network, p_i ~ U[0, p_high], every pattern."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, trial]))
    u = haar_random(n_modes, int(rng.integers(0, 2**63)))
    ens = InputEnsemble(tuple(rng.uniform(0.0, p_high, n_modes)))
    table = pattern_table(u, ens)
    return ens, [report_from_distribution(table.distribution(j), ens) for j in range(len(table.patterns))]


def _run_verify(cfg: RunConfig):
    p = cfg.payload
    n, trials = int(p["n_modes"]), int(p["trials"])
    p_high = float(p.get("p_high", 0.95))
    seed = cfg.effective_seed()

    def one(t):
        return verify_trial(n, p_high, seed, t)

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            batches = list(pool.map(one, range(trials)))
    else:
        batches = [one(t) for t in range(trials)]
    records, rows = [], []
    violations = 0
    for t, (ens, reports) in enumerate(batches):
        for r in reports:
            violations += 0 if r.satisfied else 1
            rec = {"trial": t, "probs": list(ens.probs), **r.to_json()}
            records.append(rec)
            rows.append([t, " ".join(map(str, r.pattern.counts)), r.bound_value, r.observed_ratio,
                         r.slack, r.satisfied, "|".join(r.theorem_tags), "|".join(r.violations)])
    summary = {"trials": trials, "checked": len(records), "violations": violations}
    header = ["trial", "pattern", "bound_value", "observed_ratio", "slack", "satisfied", "theorem_tags", "violations"]
    return {"reports": records, "summary": summary}, header, rows


RUNNERS = {"evaluate": _run_evaluate, "sweep": _run_sweep, "search": _run_search, "verify": _run_verify}


def run(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    stderr = sys.stderr
    try:
        cfg.validate()
        doc, header, rows = RUNNERS[cfg.command](cfg)
    except (ConfigError, jsonschema.ValidationError) as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    except NumericIntegrityError as exc:
        print(f"numeric integrity failure: {exc}", file=stderr)
        return 2
    except (PhotonDistillError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    dig = cfg.digest()
    if cfg.format == "json":
        text = io.dumps({"command": cfg.command, "config_digest": dig, "config": cfg.payload, **doc}) + "\n"
    else:
        text = io.csv_text(header + ["config_digest"], [row + [dig] for row in rows])
    io.write_atomic(cfg.output_path, text)
    if cfg.command == "verify":
        s = doc["summary"]
        print(f"trials: {s['trials']} checked: {s['checked']} violations: {s['violations']}", file=stdout)
        if s["violations"]:
            return 2
    return 0


def _threads(arg: int | None) -> int:
    if arg is None:
        arg = int(os.environ.get(THREADS_ENV, "1"))
    return arg if arg > 0 else (os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="photon-distill", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON payload for the command")
        sp.add_argument("--output", required=True, help="file to write (atomically)")
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--seed", type=int, default=None, help="overrides any seed in the config")
        sp.add_argument("--threads", type=int, default=None,
                        help=f"worker threads, 0 = one per CPU (default: ${THREADS_ENV} or 1)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 1
    cfg = RunConfig(args.command, payload, args.output, args.format, args.seed, _threads(args.threads))
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
