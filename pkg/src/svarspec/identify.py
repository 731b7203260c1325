"""Rational identification of link functions from the spectrum.

Implements regression and instrument identification, the half-trek-criterion
identification step (a linear system over R(z) whose solution contains the
link functions into one vertex), the full pipeline producing a replayable
certificate, lag-coefficient recovery from link functions, and CPDAG
discovery from a conditional-independence oracle.

The linear systems are oriented so that unknown link functions multiply
*row*-indexed spectrum entries (S[u, y], unconjugated side); solving then
returns the link functions themselves rather than their conjugates.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable

from .graph import (LfhtcOrder, LfhtcTriple, ProcessGraph, d_separated, htr,
                    lfhtc_check, lfhtc_order)
from .ratfield import RatFn
from .ratlinalg import RatMatrix, solve
from .svar import conditional_spectrum

Edge = tuple[str, str]


class ZeroInstrumentError(ArithmeticError):
    """The instrument entry of the spectrum vanishes identically."""


class MissingPrerequisiteError(KeyError):
    """A link function required by an identification step is not yet known."""


class LinkRecoveryError(ValueError):
    """Lag coefficients cannot be read off a link function."""


# -- elementary identification strategies ------------------------------------------


def identify_regression(graph: ProcessGraph, S: RatMatrix, v: str) -> dict[Edge, RatFn]:
    """Link functions of v's observed parents by regression on the parent block.

    Valid when no latent trek reaches v or its parents; with confounding the
    output is well defined but differs from the true link functions.
    """
    pa = list(graph.pa_observed(v))
    if not pa:
        return {}
    rows = [[S.entry(u, y) for u in pa] for y in pa]
    rhs = [S.entry(v, y) for y in pa]
    values = solve(RatMatrix(pa, pa, rows), rhs)
    return {(u, v): h for u, h in zip(pa, values)}


def identify_instrument(S: RatMatrix, u: str, v: str, w: str) -> RatFn:
    """Link function of v -> w through the instrument u: S[w,u] / S[v,u]."""
    denom = S.entry(v, u)
    if denom.is_zero:
        raise ZeroInstrumentError(f"S[{v!r}, {u!r}] vanishes; {u!r} is no instrument")
    return S.entry(w, u) / denom


# -- the half-trek identification step -----------------------------------------------


def _known_link(known: dict[Edge, RatFn], edge: Edge) -> RatFn:
    try:
        return known[edge]
    except KeyError:
        raise MissingPrerequisiteError(
            f"link function for edge {edge!r} required but not yet identified"
        ) from None


def lfhtc_identify_step(graph: ProcessGraph, S: RatMatrix, v: str, triple: LfhtcTriple,
                        known: dict[Edge, RatFn] | None = None):
    """Solve the half-trek linear system for the links into v.

    Returns (solved, aux, system, rhs) where solved maps each edge (u, v) to
    its link function, aux maps each w in W to the auxiliary latent ratio
    solved alongside, and (system, rhs) is the assembled linear system.
    """
    known = dict(known or {})
    check = lfhtc_check(graph, v, triple)
    if not check.ok:
        raise ValueError(f"triple fails the half-trek criterion: {check.failed}")
    pa = list(graph.pa_observed(v))
    W = list(triple.W)
    Y = list(triple.Y)
    reach = htr(graph, set(W) | {v}, frozenset(triple.Lp))

    def strip_col(row_label: str, y: str) -> RatFn:
        # S[row, y] with y's incoming observed links removed (conjugated side)
        acc = S.entry(row_label, y)
        for x in graph.pa_observed(y):
            acc = acc - S.entry(row_label, x) * _known_link(known, (x, y)).conj()
        return acc

    def b_entry(w: str, y: str) -> RatFn:
        # S[w, y] with w's incoming observed links removed (unconjugated side),
        # and additionally y's links removed when y is half-trek reachable
        if y in reach:
            acc = strip_col(w, y)
            for x in graph.pa_observed(w):
                acc = acc - _known_link(known, (x, w)) * strip_col(x, y)
            return acc
        acc = S.entry(w, y)
        for x in graph.pa_observed(w):
            acc = acc - _known_link(known, (x, w)) * S.entry(x, y)
        return acc

    rows = []
    rhs = []
    for y in Y:
        if y in reach:
            rows.append([strip_col(u, y) for u in pa] + [b_entry(w, y) for w in W])
            rhs.append(strip_col(v, y))
        else:
            rows.append([S.entry(u, y) for u in pa] + [b_entry(w, y) for w in W])
            rhs.append(S.entry(v, y))
    system = RatMatrix(Y, pa + W, rows)
    values = solve(system, rhs)  # raises SingularMatrixError for non-generic input
    solved = {(u, v): h for u, h in zip(pa, values[: len(pa)])}
    aux = {w: f for w, f in zip(W, values[len(pa):])}
    return solved, aux, system, rhs


# -- the full pipeline ------------------------------------------------------------------


@dataclass(frozen=True)
class IdentificationStep:
    vertex: str
    triple: LfhtcTriple
    method: str  # "regression" | "lfhtc"
    system: RatMatrix
    rhs: tuple[RatFn, ...]
    solved: dict[Edge, RatFn]
    aux: dict[str, RatFn]


@dataclass(frozen=True)
class IdentificationCertificate:
    """Ordered, replayable record of how each link function was identified."""

    steps: tuple[IdentificationStep, ...]
    unresolved_vertices: tuple[str, ...]
    unresolved_edges: tuple[Edge, ...]

    @property
    def solved(self) -> dict[Edge, RatFn]:
        out: dict[Edge, RatFn] = {}
        for step in self.steps:
            out.update(step.solved)
        return out

    @property
    def ok(self) -> bool:
        return not self.unresolved_edges

    def plan(self) -> tuple[tuple[str, LfhtcTriple], ...]:
        return tuple((s.vertex, s.triple) for s in self.steps)


def _method_tag(graph: ProcessGraph, v: str, triple: LfhtcTriple) -> str:
    if triple.is_regression and set(triple.Y) == set(graph.pa_observed(v)):
        return "regression"
    return "lfhtc"


def identify_all(graph: ProcessGraph, S: RatMatrix,
                 order: LfhtcOrder | None = None) -> IdentificationCertificate:
    """Run the half-trek recursion over the whole graph against a spectrum."""
    if order is None:
        order = lfhtc_order(graph)
    known: dict[Edge, RatFn] = {}
    steps: list[IdentificationStep] = []
    for v, triple in order.steps:
        if not graph.pa_observed(v):
            continue
        solved, aux, system, rhs = lfhtc_identify_step(graph, S, v, triple, known)
        known.update(solved)
        steps.append(IdentificationStep(
            vertex=v, triple=triple, method=_method_tag(graph, v, triple),
            system=system, rhs=tuple(rhs), solved=solved, aux=aux,
        ))
    unresolved_edges = tuple(sorted(
        (x, v) for v in order.unresolved for x in graph.pa_observed(v)
    ))
    return IdentificationCertificate(tuple(steps), order.unresolved, unresolved_edges)


def replay_certificate(graph: ProcessGraph, S: RatMatrix,
                       plan) -> IdentificationCertificate:
    """Re-execute a (vertex, triple) plan against a spectrum."""
    known: dict[Edge, RatFn] = {}
    steps: list[IdentificationStep] = []
    for v, triple in plan:
        if not graph.pa_observed(v):
            continue
        solved, aux, system, rhs = lfhtc_identify_step(graph, S, v, triple, known)
        known.update(solved)
        steps.append(IdentificationStep(
            vertex=v, triple=triple, method=_method_tag(graph, v, triple),
            system=system, rhs=tuple(rhs), solved=solved, aux=aux,
        ))
    return IdentificationCertificate(tuple(steps), (), ())


# -- coefficient recovery -------------------------------------------------------------------


def recover_lag_coefficients(h: RatFn, cross_lags=None, auto_lags=None):
    """Read cross and auto lag coefficients off a link function.

    Normalizes the denominator's constant term to 1, returning
    ({lag: cross coefficient}, {lag: auto coefficient}).  When the expected
    lag sets are supplied, a support mismatch (the symptom of a cancelled,
    non-generic representation) raises LinkRecoveryError.
    """
    den0 = h.den[0]
    if den0 == 0:
        raise LinkRecoveryError("denominator constant term is zero; representation cancelled")
    num = h.num.scale(1 / den0)
    den = h.den.scale(1 / den0)
    cross = {k: c for k, c in enumerate(num.coeffs) if c}
    auto = {k: -c for k, c in enumerate(den.coeffs) if c and k > 0}
    # a cancelled (resultant-zero) representation loses lags, so the supports
    # must match the declared structure exactly
    if cross_lags is not None and set(cross) != set(cross_lags):
        raise LinkRecoveryError(
            f"recovered cross lags {sorted(cross)} differ from expected {sorted(cross_lags)}"
        )
    if auto_lags is not None and set(auto) != set(auto_lags):
        raise LinkRecoveryError(
            f"recovered auto lags {sorted(auto)} differ from expected {sorted(auto_lags)}"
        )
    return cross, auto


# -- CPDAG discovery --------------------------------------------------------------------------

CiOracle = Callable[[frozenset, frozenset, frozenset], bool]


@dataclass(frozen=True)
class Cpdag:
    """Partially directed graph: directed edges plus undirected (unordered) ones."""

    nodes: tuple[str, ...]
    directed: frozenset[Edge]
    undirected: frozenset[frozenset]
    warnings: tuple[str, ...] = ()

    def skeleton(self) -> frozenset[frozenset]:
        return self.undirected | frozenset(frozenset(e) for e in self.directed)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Cpdag)
            and self.nodes == other.nodes
            and self.directed == other.directed
            and self.undirected == other.undirected
        )

    def __hash__(self):
        return hash((self.nodes, self.directed, self.undirected))


def dsep_ci_oracle(graph: ProcessGraph) -> CiOracle:
    """Graphical conditional-independence oracle from d-separation."""

    def oracle(X, Y, Z) -> bool:
        return d_separated(graph, X, Y, Z)

    return oracle


def spectral_ci_oracle(S: RatMatrix) -> CiOracle:
    """Exact symbolic oracle: the conditional cross-spectrum vanishes identically."""
    cache: dict[tuple, bool] = {}

    def oracle(X, Y, Z) -> bool:
        key = (frozenset(X), frozenset(Y), frozenset(Z))
        if key not in cache:
            cache[key] = conditional_spectrum(S, set(X), set(Y), set(Z)).is_zero
        return cache[key]

    return oracle


def discover_cpdag(ci_oracle: CiOracle, labels) -> Cpdag:
    """PC-style skeleton search, v-structure orientation and Meek closure."""
    nodes = tuple(sorted(labels))
    adjacent: dict[str, set[str]] = {v: set(nodes) - {v} for v in nodes}
    sepsets: dict[frozenset, frozenset] = {}
    warnings: list[str] = []

    def pairs():
        return [(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]]

    # skeleton: grow the conditioning size while any test is still possible
    level = 0
    while any(len(adjacent[a] - {b}) >= level for a, b in pairs() if b in adjacent[a]):
        for a, b in pairs():
            if b not in adjacent[a]:
                continue
            found = None
            for side in (a, b):
                other = b if side == a else a
                candidates = sorted(adjacent[side] - {other})
                if len(candidates) < level:
                    continue
                for Z in combinations(candidates, level):
                    if ci_oracle(frozenset({a}), frozenset({b}), frozenset(Z)):
                        found = frozenset(Z)
                        break
                if found is not None:
                    break
            if found is not None:
                adjacent[a].discard(b)
                adjacent[b].discard(a)
                sepsets[frozenset((a, b))] = found
        level += 1

    # orient v-structures a -> c <- b when c is outside sepset(a, b)
    directed: set[Edge] = set()
    undirected: set[frozenset] = {frozenset((a, b)) for a, b in pairs() if b in adjacent[a]}
    for c in nodes:
        for a, b in combinations(sorted(adjacent[c]), 2):
            if b in adjacent[a]:
                continue
            if c not in sepsets.get(frozenset((a, b)), frozenset()):
                for tail in (a, b):
                    if frozenset((tail, c)) in undirected:
                        undirected.discard(frozenset((tail, c)))
                        directed.add((tail, c))
                    elif (c, tail) in directed:
                        warnings.append(
                            f"conflicting v-structure orientation at {c!r} from ({a!r}, {b!r})"
                        )

    def points_to(a, b):
        return (a, b) in directed

    def linked(a, b):
        return frozenset((a, b)) in undirected

    # Meek rules to closure
    changed = True
    while changed:
        changed = False
        for a in nodes:
            for b in nodes:
                if a == b or not linked(a, b):
                    continue
                orient = False
                # R1: c -> a and c, b non-adjacent
                for c in nodes:
                    if points_to(c, a) and c != b and not linked(c, b) \
                            and not points_to(c, b) and not points_to(b, c):
                        orient = True
                        break
                # R2: a -> c -> b
                if not orient:
                    for c in nodes:
                        if points_to(a, c) and points_to(c, b):
                            orient = True
                            break
                # R3: a - c -> b and a - d -> b with c, d non-adjacent
                if not orient:
                    incoming = [c for c in nodes if points_to(c, b) and linked(a, c)]
                    for c, d in combinations(incoming, 2):
                        if not linked(c, d) and not points_to(c, d) and not points_to(d, c):
                            orient = True
                            break
                if orient:
                    undirected.discard(frozenset((a, b)))
                    directed.add((a, b))
                    changed = True
    return Cpdag(nodes, frozenset(directed), frozenset(undirected), tuple(warnings))
