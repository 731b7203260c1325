"""File formats: graphs, parameters, spectrum bundles, certificates, series.

Everything structured is JSON with sorted keys and a trailing newline, so
identical inputs produce byte-identical files.  Exact rational coefficients
travel as strings "p/q"; decimal notation is rejected on load.  Series are
columnar text with a label header row.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .graph import (GraphValidationError, LfhtcTriple, ProcessGraph,
                    TimeSeriesGraph)
from .identify import (IdentificationCertificate, IdentificationStep)
from .ratfield import coeff_from_str, coeff_to_str, ratfn_from_dict, ratfn_to_dict
from .ratlinalg import matrix_from_dict, matrix_to_dict
from .simulate import SeriesSample, SpectrumEstimate
from .svar import SpectrumBundle, SvarParams


def _dump(data: Any, path: str | Path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _load(path: str | Path) -> Any:
    return json.loads(Path(path).read_text())


# -- graphs -------------------------------------------------------------------------


def graph_to_dict(tsg: TimeSeriesGraph) -> dict:
    return {
        "observed": list(tsg.base.observed),
        "latent": list(tsg.base.latent),
        "edges": [
            {"from": a, "to": b, "lags": list(tsg.cross_lags[(a, b)])}
            for (a, b) in sorted(tsg.base.edges)
        ],
        "auto": {v: list(lags) for v, lags in sorted(tsg.auto_lags.items())},
    }


def graph_from_dict(data: dict) -> TimeSeriesGraph:
    try:
        observed = data["observed"]
        latent = data.get("latent", [])
        edge_entries = data["edges"]
    except KeyError as exc:
        raise GraphValidationError(f"graph file is missing key {exc.args[0]!r}") from None
    edges = []
    cross = {}
    for i, entry in enumerate(edge_entries):
        try:
            a, b, lags = entry["from"], entry["to"], entry["lags"]
        except KeyError as exc:
            raise GraphValidationError(
                f"edge entry #{i} ({entry!r}) is missing key {exc.args[0]!r}"
            ) from None
        if not lags:
            raise GraphValidationError(f"edge entry #{i} ({a} -> {b}) has an empty lag list")
        for k in lags:
            if not isinstance(k, int) or k < 0:
                raise GraphValidationError(
                    f"edge entry #{i} ({a} -> {b}) has invalid lag {k!r}"
                )
        edges.append((a, b))
        cross[(a, b)] = tuple(sorted(set(lags)))
    auto = {}
    for v, lags in data.get("auto", {}).items():
        for k in lags:
            if not isinstance(k, int) or k < 1:
                raise GraphValidationError(f"auto lag {k!r} at {v!r} must be an integer >= 1")
        if lags:
            auto[v] = tuple(sorted(set(lags)))
    base = ProcessGraph.make(observed, latent, edges)
    return TimeSeriesGraph.make(base, cross, auto)


def save_graph(tsg: TimeSeriesGraph, path) -> None:
    _dump(graph_to_dict(tsg), path)


def load_graph(path) -> TimeSeriesGraph:
    return graph_from_dict(_load(path))


# -- parameters ---------------------------------------------------------------------------


def params_to_dict(params: SvarParams) -> dict:
    return {
        "cross": [
            {"from": a, "to": b, "lag": k, "coeff": coeff_to_str(c)}
            for (a, b, k), c in sorted(params.cross.items())
        ],
        "auto": [
            {"vertex": v, "lag": k, "coeff": coeff_to_str(c)}
            for (v, k), c in sorted(params.auto.items())
        ],
        "noise": [
            {"vertex": v, "variance": coeff_to_str(w)}
            for v, w in sorted(params.noise.items())
        ],
    }


def params_from_dict(data: dict) -> SvarParams:
    cross = {
        (e["from"], e["to"], int(e["lag"])): coeff_from_str(e["coeff"])
        for e in data.get("cross", [])
    }
    auto = {
        (e["vertex"], int(e["lag"])): coeff_from_str(e["coeff"])
        for e in data.get("auto", [])
    }
    noise = {e["vertex"]: coeff_from_str(e["variance"]) for e in data.get("noise", [])}
    return SvarParams(cross=cross, auto=auto, noise=noise)


def save_params(params: SvarParams, path) -> None:
    _dump(params_to_dict(params), path)


def load_params(path) -> SvarParams:
    return params_from_dict(_load(path))


# -- spectrum bundles --------------------------------------------------------------------------


def bundle_to_dict(bundle: SpectrumBundle) -> dict:
    return {
        "H": matrix_to_dict(bundle.H),
        "S_I": matrix_to_dict(bundle.S_I),
        "S_LI": matrix_to_dict(bundle.S_LI),
        "S": matrix_to_dict(bundle.S),
    }


def bundle_from_dict(data: dict) -> SpectrumBundle:
    return SpectrumBundle(
        H=matrix_from_dict(data["H"]),
        S_I=matrix_from_dict(data["S_I"]),
        S_LI=matrix_from_dict(data["S_LI"]),
        S=matrix_from_dict(data["S"]),
    )


def save_bundle(bundle: SpectrumBundle, path) -> None:
    _dump(bundle_to_dict(bundle), path)


def load_bundle(path) -> SpectrumBundle:
    return bundle_from_dict(_load(path))


# -- certificates ---------------------------------------------------------------------------------


def _triple_to_dict(triple: LfhtcTriple) -> dict:
    return {"Y": list(triple.Y), "W": list(triple.W), "Lp": list(triple.Lp)}


def _triple_from_dict(data: dict) -> LfhtcTriple:
    return LfhtcTriple.make(data["Y"], data["W"], data["Lp"])


def certificate_to_dict(cert: IdentificationCertificate) -> dict:
    return {
        "steps": [
            {
                "vertex": s.vertex,
                "triple": _triple_to_dict(s.triple),
                "method": s.method,
                "system": matrix_to_dict(s.system),
                "rhs": [ratfn_to_dict(r) for r in s.rhs],
                "solved": [
                    {"from": a, "to": b, "link": ratfn_to_dict(h)}
                    for (a, b), h in sorted(s.solved.items())
                ],
                "aux": {w: ratfn_to_dict(f) for w, f in sorted(s.aux.items())},
            }
            for s in cert.steps
        ],
        "unresolved_vertices": list(cert.unresolved_vertices),
        "unresolved_edges": [list(e) for e in cert.unresolved_edges],
    }


def certificate_from_dict(data: dict) -> IdentificationCertificate:
    steps = []
    for s in data["steps"]:
        steps.append(IdentificationStep(
            vertex=s["vertex"],
            triple=_triple_from_dict(s["triple"]),
            method=s["method"],
            system=matrix_from_dict(s["system"]),
            rhs=tuple(ratfn_from_dict(r) for r in s["rhs"]),
            solved={(e["from"], e["to"]): ratfn_from_dict(e["link"]) for e in s["solved"]},
            aux={w: ratfn_from_dict(f) for w, f in s["aux"].items()},
        ))
    return IdentificationCertificate(
        tuple(steps),
        tuple(data.get("unresolved_vertices", ())),
        tuple(tuple(e) for e in data.get("unresolved_edges", ())),
    )


def save_certificate(cert: IdentificationCertificate, path) -> None:
    _dump(certificate_to_dict(cert), path)


def load_certificate(path) -> IdentificationCertificate:
    return certificate_from_dict(_load(path))


# -- series and estimates -------------------------------------------------------------------------------


def save_series(series: SeriesSample, path) -> None:
    header = "\t".join(series.labels)
    body = "\n".join(
        "\t".join(repr(float(x)) for x in row) for row in series.values
    )
    Path(path).write_text(header + "\n" + body + "\n")


def load_series(path) -> SeriesSample:
    lines = Path(path).read_text().strip().splitlines()
    labels = tuple(lines[0].split("\t"))
    values = np.array([[float(x) for x in line.split("\t")] for line in lines[1:]])
    return SeriesSample(labels, values)


def estimate_to_dict(est: SpectrumEstimate) -> dict:
    return {
        "labels": list(est.labels),
        "frequencies": list(est.frequencies),
        "segment_count": est.segment_count,
        "segment_length": est.segment_length,
        "window": est.window,
        "matrices": [
            {
                "frequency": f,
                "real": np.real(m).tolist(),
                "imag": np.imag(m).tolist(),
            }
            for f, m in zip(est.frequencies, est.matrices)
        ],
    }


def estimate_from_dict(data: dict) -> SpectrumEstimate:
    mats = np.array([
        np.array(m["real"]) + 1j * np.array(m["imag"]) for m in data["matrices"]
    ])
    return SpectrumEstimate(
        labels=tuple(data["labels"]),
        frequencies=tuple(float(f) for f in data["frequencies"]),
        matrices=mats,
        segment_count=int(data["segment_count"]),
        segment_length=int(data["segment_length"]),
        window=data.get("window", "hann"),
    )


def save_estimate(est: SpectrumEstimate, path) -> None:
    _dump(estimate_to_dict(est), path)


def load_estimate(path) -> SpectrumEstimate:
    return estimate_from_dict(_load(path))
