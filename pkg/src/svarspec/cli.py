"""Command-line interface.

Every command prints a run report (JSON) to stdout and writes its primary
output, if any, to --out.  Primary outputs are byte-deterministic for
identical invocations; randomized commands therefore require an explicit
--seed.  Exit codes: 0 success, 2 validation failure, 3 non-generic or
singular input after retries, 4 estimation precondition failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import io as sio
from .graph import (CyclicGraphError, GraphValidationError, d_separated,
                    enumerate_treks, t_separation_min)
from .identify import discover_cpdag, identify_all, spectral_ci_oracle
from .ratlinalg import SingularMatrixError
from .simulate import (EstimationError, IllConditionedBlockError,
                       SimulationError, empirical_ci_test, estimate_spectrum,
                       simulate_series)
from .svar import (ParameterError, SvarParams, generic_rank,
                   sample_stable_params, spectrum)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NON_GENERIC = 3
EXIT_ESTIMATION = 4

RESAMPLE_ATTEMPTS = 3


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message
        super().__init__(message)


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def _report(command: str, inputs: dict, outputs, seed=None, warnings=(), started=None) -> dict:
    return {
        "command": command,
        "inputs": {name: _digest(path) for name, path in inputs.items()},
        "seed": seed,
        "outputs": outputs,
        "warnings": list(warnings),
        "timing_seconds": round(time.perf_counter() - started, 6) if started else None,
    }


def _labels(arg: str | None) -> tuple[str, ...]:
    if not arg:
        return ()
    return tuple(s.strip() for s in arg.split(",") if s.strip())


def _load_graph(path: str):
    try:
        return sio.load_graph(path)
    except (GraphValidationError, KeyError, ValueError) as exc:
        raise CliError(EXIT_VALIDATION, f"invalid graph file: {exc}") from exc


def _load_params(tsg, path: str) -> SvarParams:
    try:
        params = sio.load_params(path)
        params.validate(tsg)
        return params
    except (ParameterError, ValueError, KeyError) as exc:
        raise CliError(EXIT_VALIDATION, f"invalid parameter file: {exc}") from exc


def _with_resampling(build, seed: int, warnings: list[str]):
    """Retry a seeded computation on singular systems, recording each resample."""
    for attempt in range(RESAMPLE_ATTEMPTS):
        try:
            return build(seed + attempt)
        except SingularMatrixError:
            warnings.append(f"singular system at seed {seed + attempt}; resampling")
    raise CliError(EXIT_NON_GENERIC,
                   f"singular system persisted over {RESAMPLE_ATTEMPTS} seeds from {seed}")


# -- commands -------------------------------------------------------------------------


def cmd_validate(args) -> dict:
    started = time.perf_counter()
    tsg = _load_graph(args.graph)
    return _report("validate", {"graph": args.graph},
                   {"observed": list(tsg.base.observed),
                    "latent": list(tsg.base.latent),
                    "edges": len(tsg.base.edges),
                    "order": tsg.order,
                    "acyclic": tsg.base.is_acyclic},
                   started=started)


def cmd_query(args) -> dict:
    started = time.perf_counter()
    tsg = _load_graph(args.graph)
    graph = tsg.base
    X, Y, Z = _labels(args.x), _labels(args.y), _labels(args.z)
    try:
        if args.query == "dsep":
            outputs = {"d_separated": d_separated(graph, X, Y, Z)}
        elif args.query == "tsep":
            size, zx, zy = t_separation_min(graph, X, Y)
            outputs = {"size": size, "Z_X": list(zx), "Z_Y": list(zy)}
        elif args.query == "rank":
            if args.seed is None:
                raise CliError(EXIT_VALIDATION, "rank queries require --seed")
            outputs = {"generic_rank": generic_rank(tsg, X, Y, trials=args.trials,
                                                    seed=args.seed)}
        else:  # treks
            treks = [
                {"top": t.top, "left": list(t.left.vertices), "right": list(t.right.vertices)}
                for x in X for y in Y for t in enumerate_treks(graph, x, y)
            ]
            outputs = {"treks": treks, "count": len(treks)}
    except (KeyError, ValueError, CyclicGraphError) as exc:
        if isinstance(exc, CliError):
            raise
        raise CliError(EXIT_VALIDATION, f"bad query: {exc}") from exc
    return _report(f"query:{args.query}", {"graph": args.graph}, outputs,
                   seed=args.seed, started=started)


def cmd_spectrum(args) -> dict:
    started = time.perf_counter()
    tsg = _load_graph(args.graph)
    params = _load_params(tsg, args.params)
    try:
        bundle = spectrum(tsg, params)
    except SingularMatrixError as exc:
        raise CliError(EXIT_NON_GENERIC, f"spectrum is singular: {exc}") from exc
    sio.save_bundle(bundle, args.out)
    return _report("spectrum", {"graph": args.graph, "params": args.params},
                   {"out": args.out, "observed": list(tsg.base.observed)},
                   started=started)


def cmd_identify(args) -> dict:
    started = time.perf_counter()
    tsg = _load_graph(args.graph)
    warnings: list[str] = []
    if args.spectrum:
        S = sio.load_bundle(args.spectrum).S
        inputs = {"graph": args.graph, "spectrum": args.spectrum}
    elif args.params:
        params = _load_params(tsg, args.params)
        S = spectrum(tsg, params).S
        inputs = {"graph": args.graph, "params": args.params}
    else:
        raise CliError(EXIT_VALIDATION, "identify needs --params or --spectrum")
    try:
        cert = identify_all(tsg.base, S)
    except SingularMatrixError as exc:
        raise CliError(EXIT_NON_GENERIC,
                       f"identification system singular for the given input: {exc}") from exc
    except KeyError as exc:
        raise CliError(EXIT_VALIDATION,
                       f"spectrum labels do not match the graph: {exc}") from exc
    sio.save_certificate(cert, args.out)
    solved = {f"{a}->{b}": True for (a, b) in cert.solved}
    return _report("identify", inputs,
                   {"out": args.out, "solved_edges": sorted(solved),
                    "unresolved_edges": [f"{a}->{b}" for a, b in cert.unresolved_edges]},
                   warnings=warnings, started=started)


def cmd_simulate(args) -> dict:
    started = time.perf_counter()
    tsg = _load_graph(args.graph)
    params = _load_params(tsg, args.params)
    try:
        series = simulate_series(tsg, params, length=args.length,
                                 burn_in=args.burn_in, seed=args.seed)
    except SimulationError as exc:
        raise CliError(EXIT_VALIDATION, str(exc)) from exc
    sio.save_series(series, args.out)
    return _report("simulate", {"graph": args.graph, "params": args.params},
                   {"out": args.out, "length": series.length},
                   seed=args.seed, started=started)


def _parse_frequencies(arg: str) -> tuple[float, ...]:
    parts = [p for p in arg.split(",") if p.strip()]
    if len(parts) == 1 and "." not in parts[0]:
        count = int(parts[0])
        return tuple(np.pi * (j + 1) / (count + 1) for j in range(count))
    return tuple(float(p) for p in parts)


def cmd_estimate(args) -> dict:
    started = time.perf_counter()
    series = sio.load_series(args.series)
    try:
        est = estimate_spectrum(series, _parse_frequencies(args.frequencies),
                                segment_length=args.segments, overlap=args.overlap)
    except EstimationError as exc:
        raise CliError(EXIT_ESTIMATION, str(exc)) from exc
    sio.save_estimate(est, args.out)
    return _report("estimate", {"series": args.series},
                   {"out": args.out, "segments": est.segment_count,
                    "frequencies": list(est.frequencies)},
                   started=started)


def cmd_discover(args) -> dict:
    started = time.perf_counter()
    tsg = _load_graph(args.graph)
    observed = tsg.base.observed
    warnings: list[str] = []
    if args.estimate:
        est = sio.load_estimate(args.estimate)
        threshold = args.threshold

        def oracle(X, Y, Z):
            try:
                return empirical_ci_test(est, set(X), set(Y), set(Z), threshold=threshold)
            except IllConditionedBlockError as exc:
                warnings.append(str(exc))
                return False

        cpdag = discover_cpdag(oracle, observed)
        inputs = {"graph": args.graph, "estimate": args.estimate}
        seed = None
    else:
        inputs = {"graph": args.graph}
        if args.params:
            params = _load_params(tsg, args.params)
            S = spectrum(tsg, params).S
            cpdag = discover_cpdag(spectral_ci_oracle(S), observed)
            inputs["params"] = args.params
            seed = None
        else:
            if args.seed is None:
                raise CliError(EXIT_VALIDATION, "discover needs --params, --estimate or --seed")
            seed = args.seed

            def build(s):
                params = sample_stable_params(tsg, seed=s)
                S = spectrum(tsg, params).S
                return discover_cpdag(spectral_ci_oracle(S), observed)

            cpdag = _with_resampling(build, seed, warnings)
    result = {
        "nodes": list(cpdag.nodes),
        "directed": sorted(f"{a}->{b}" for a, b in cpdag.directed),
        "undirected": sorted("--".join(sorted(e)) for e in cpdag.undirected),
    }
    if args.out:
        Path(args.out).write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
        outputs = {"out": args.out, **result}
    else:
        outputs = result
    warnings.extend(cpdag.warnings)
    return _report("discover", inputs, outputs, seed=seed,
                   warnings=warnings, started=started)


# -- entry point ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svarspec",
        description="Exact frequency-domain algebra and causal identification "
                    "for SVAR process graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a graph file")
    p.add_argument("--graph", required=True)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("query", help="separation/rank/trek queries on a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--query", required=True, choices=["dsep", "tsep", "rank", "treks"])
    p.add_argument("--x", required=True, help="comma-separated labels")
    p.add_argument("--y", required=True, help="comma-separated labels")
    p.add_argument("--z", default="", help="comma-separated labels")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("spectrum", help="compute the exact spectrum bundle")
    p.add_argument("--graph", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_spectrum)

    p = sub.add_parser("identify", help="run rational identification")
    p.add_argument("--graph", required=True)
    p.add_argument("--params")
    p.add_argument("--spectrum")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_identify)

    p = sub.add_parser("simulate", help="simulate a trajectory")
    p.add_argument("--graph", required=True)
    p.add_argument("--params", required=True)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("estimate", help="Welch cross-spectral estimate from a series")
    p.add_argument("--series", required=True)
    p.add_argument("--frequencies", required=True,
                   help="comma-separated angles in [0, pi], or a count")
    p.add_argument("--segments", type=int, required=True, help="segment length")
    p.add_argument("--overlap", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_estimate)

    p = sub.add_parser("discover", help="CPDAG discovery from a CI oracle")
    p.add_argument("--graph", required=True)
    p.add_argument("--params")
    p.add_argument("--estimate")
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_discover)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = args.fn(args)
    except CliError as exc:
        json.dump({"command": args.command, "error": exc.message}, sys.stdout, indent=2)
        print()
        return exc.code
    json.dump(report, sys.stdout, indent=2, sort_keys=True)
    print()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
