"""Process graphs with exogenous latent structure and the combinatorics on them.

Provides directed-path and trek enumeration, path/trek systems with
permutation signs, d-separation, minimal t-separation, half-trek
reachability, and the latent-factor half-trek criterion (check, search and
fixpoint ordering).  Latent vertices must have in-degree zero; graphs are
immutable after construction and every query is pure.

Enumeration order is deterministic everywhere (lexicographic by label), so
identification certificates built on top of these queries are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

Edge = tuple[str, str]


class GraphValidationError(ValueError):
    """The graph violates a structural invariant."""


class CyclicGraphError(ValueError):
    """The query needs an acyclic process graph."""


@dataclass(frozen=True)
class ProcessGraph:
    """Finite causal graph over observed and latent process labels."""

    observed: tuple[str, ...]
    latent: tuple[str, ...]
    edges: tuple[Edge, ...]

    @staticmethod
    def make(observed, latent=(), edges=()) -> "ProcessGraph":
        obs = tuple(sorted(observed))
        lat = tuple(sorted(latent))
        edge_list = tuple(sorted((str(a), str(b)) for a, b in edges))
        return ProcessGraph(obs, lat, edge_list)

    def __post_init__(self):
        obs, lat = set(self.observed), set(self.latent)
        if obs & lat:
            raise GraphValidationError(f"labels both observed and latent: {sorted(obs & lat)}")
        vertices = obs | lat
        for a, b in self.edges:
            if a not in vertices or b not in vertices:
                raise GraphValidationError(f"edge ({a!r}, {b!r}) uses an unknown label")
            if a == b:
                raise GraphValidationError(f"self-loop at {a!r}; auto-dependence lives in lag sets")
            if b in lat:
                raise GraphValidationError(
                    f"edge ({a!r}, {b!r}) points into latent vertex {b!r}; "
                    "latent processes must be exogenous"
                )
        if len(set(self.edges)) != len(self.edges):
            raise GraphValidationError("duplicate edges")

    # -- structure ----------------------------------------------------------

    @property
    def vertices(self) -> tuple[str, ...]:
        return tuple(sorted(self.observed + self.latent))

    @cached_property
    def _parents(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {v: [] for v in self.vertices}
        for a, b in self.edges:
            out[b].append(a)
        return {v: tuple(sorted(ps)) for v, ps in out.items()}

    @cached_property
    def _children(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {v: [] for v in self.vertices}
        for a, b in self.edges:
            out[a].append(b)
        return {v: tuple(sorted(cs)) for v, cs in out.items()}

    def parents(self, v: str) -> tuple[str, ...]:
        return self._parents[v]

    def children(self, v: str) -> tuple[str, ...]:
        return self._children[v]

    def pa_observed(self, v: str) -> tuple[str, ...]:
        return tuple(p for p in self._parents[v] if p in set(self.observed))

    def pa_latent(self, v: str) -> tuple[str, ...]:
        return tuple(p for p in self._parents[v] if p in set(self.latent))

    def has_edge(self, a: str, b: str) -> bool:
        return (a, b) in set(self.edges)

    @cached_property
    def is_acyclic(self) -> bool:
        return self._topological_order() is not None

    def _topological_order(self) -> tuple[str, ...] | None:
        indeg = {v: 0 for v in self.vertices}
        for _, b in self.edges:
            indeg[b] += 1
        ready = sorted(v for v, d in indeg.items() if d == 0)
        order: list[str] = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for c in self.children(v):
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
            ready.sort()
        return tuple(order) if len(order) == len(self.vertices) else None

    def topological_order(self) -> tuple[str, ...]:
        order = self._topological_order()
        if order is None:
            raise CyclicGraphError("graph has a directed cycle")
        return order

    def require_acyclic(self) -> None:
        if not self.is_acyclic:
            raise CyclicGraphError("query requires an acyclic process graph")

    def descendants(self, v: str) -> frozenset[str]:
        """Vertices reachable from v through at least one edge."""
        seen: set[str] = set()
        stack = list(self.children(v))
        while stack:
            w = stack.pop()
            if w not in seen:
                seen.add(w)
                stack.extend(self.children(w))
        return frozenset(seen)

    def ancestral_closure(self, nodes) -> frozenset[str]:
        """nodes together with all their ancestors."""
        seen = set(nodes)
        stack = list(nodes)
        while stack:
            w = stack.pop()
            for p in self.parents(w):
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return frozenset(seen)

    def with_edges(self, edges) -> "ProcessGraph":
        """Same vertex sets, restricted/replaced edge set."""
        return ProcessGraph.make(self.observed, self.latent, edges)

    def observed_subgraph_cyclic(self) -> bool:
        """Whether the edges among observed vertices contain a directed cycle."""
        sub = ProcessGraph.make(self.observed, (),
                                [e for e in self.edges
                                 if e[0] in set(self.observed) and e[1] in set(self.observed)])
        return not sub.is_acyclic


@dataclass(frozen=True)
class TimeSeriesGraph:
    """Process graph annotated with lag sets; order is the maximum lag."""

    base: ProcessGraph
    cross_lags: dict[Edge, tuple[int, ...]] = field(default_factory=dict)
    auto_lags: dict[str, tuple[int, ...]] = field(default_factory=dict)

    @staticmethod
    def make(base: ProcessGraph, cross_lags, auto_lags=None) -> "TimeSeriesGraph":
        cross = {
            (str(a), str(b)): tuple(sorted(set(int(k) for k in lags)))
            for (a, b), lags in dict(cross_lags).items()
        }
        auto = {
            str(v): tuple(sorted(set(int(k) for k in lags)))
            for v, lags in dict(auto_lags or {}).items()
            if lags
        }
        return TimeSeriesGraph(base, cross, auto)

    @staticmethod
    def full(base: ProcessGraph, order: int) -> "TimeSeriesGraph":
        """All cross lags 0..order on every edge, auto lags 1..order everywhere."""
        cross = {e: tuple(range(order + 1)) for e in base.edges}
        auto = {v: tuple(range(1, order + 1)) for v in base.vertices} if order >= 1 else {}
        return TimeSeriesGraph(base, cross, auto)

    def __post_init__(self):
        edge_set = set(self.base.edges)
        if set(self.cross_lags) != edge_set:
            missing = edge_set - set(self.cross_lags)
            extra = set(self.cross_lags) - edge_set
            raise GraphValidationError(
                f"cross lag keys do not match edges (missing {sorted(missing)}, extra {sorted(extra)})"
            )
        for e, lags in self.cross_lags.items():
            if not lags:
                raise GraphValidationError(f"edge {e} has an empty lag set")
            if any(k < 0 for k in lags):
                raise GraphValidationError(f"edge {e} has a negative lag")
        vertices = set(self.base.vertices)
        for v, lags in self.auto_lags.items():
            if v not in vertices:
                raise GraphValidationError(f"auto lags for unknown vertex {v!r}")
            if any(k < 1 for k in lags):
                raise GraphValidationError(f"auto lag at {v!r} must be >= 1")

    @property
    def order(self) -> int:
        lags = [k for ls in self.cross_lags.values() for k in ls]
        lags += [k for ls in self.auto_lags.values() for k in ls]
        return max(lags, default=0)

    def auto_lags_of(self, v: str) -> tuple[int, ...]:
        return self.auto_lags.get(v, ())


# -- paths and treks ---------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Path:
    """Directed path as its vertex sequence; length one means the empty path."""

    vertices: tuple[str, ...]

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("a path visits at least one vertex")

    @property
    def source(self) -> str:
        return self.vertices[0]

    @property
    def target(self) -> str:
        return self.vertices[-1]

    @property
    def is_empty(self) -> bool:
        return len(self.vertices) == 1

    @property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(zip(self.vertices, self.vertices[1:]))

    def vertex_set(self) -> frozenset[str]:
        return frozenset(self.vertices)

    def validate(self, graph: ProcessGraph) -> None:
        for a, b in self.edges:
            if not graph.has_edge(a, b):
                raise GraphValidationError(f"path uses non-edge ({a!r}, {b!r})")


@dataclass(frozen=True, order=True)
class Trek:
    """Pair of directed paths out of a common top vertex."""

    top: str
    left: Path
    right: Path

    def __post_init__(self):
        if self.left.source != self.top or self.right.source != self.top:
            raise ValueError("both sides of a trek start at its top")

    @property
    def source(self) -> str:
        """Endpoint of the left side (the trek runs from here)."""
        return self.left.target

    @property
    def target(self) -> str:
        """Endpoint of the right side (the trek runs to here)."""
        return self.right.target

    @property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(dict.fromkeys(self.left.edges + self.right.edges))

    @property
    def is_trivial(self) -> bool:
        return self.left.is_empty and self.right.is_empty


def _perm_sign(perm: tuple[int, ...]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass(frozen=True)
class PathSystem:
    """Paths with pairwise distinct sources and targets, plus the induced sign."""

    paths: tuple[Path, ...]
    sign: int

    def __post_init__(self):
        sources = [p.source for p in self.paths]
        targets = [p.target for p in self.paths]
        if len(set(sources)) != len(sources) or len(set(targets)) != len(targets):
            raise ValueError("path system sources/targets must be distinct")


@dataclass(frozen=True)
class TrekSystem:
    """Treks with pairwise distinct sources and targets, plus the induced sign."""

    treks: tuple[Trek, ...]
    sign: int

    def __post_init__(self):
        sources = [t.source for t in self.treks]
        targets = [t.target for t in self.treks]
        if len(set(sources)) != len(sources) or len(set(targets)) != len(targets):
            raise ValueError("trek system sources/targets must be distinct")

    @property
    def sources(self) -> tuple[str, ...]:
        return tuple(t.source for t in self.treks)

    @property
    def targets(self) -> tuple[str, ...]:
        return tuple(t.target for t in self.treks)

    def edge_set(self) -> frozenset[Edge]:
        return frozenset(e for t in self.treks for e in t.edges)


def enumerate_paths(graph: ProcessGraph, x: str, y: str) -> tuple[Path, ...]:
    """All directed paths x .. y, including the empty path when x == y."""
    graph.require_acyclic()
    if x not in graph.vertices or y not in graph.vertices:
        raise KeyError(f"unknown label {x!r} or {y!r}")
    out: list[Path] = []

    def extend(prefix: list[str]) -> None:
        v = prefix[-1]
        if v == y:
            out.append(Path(tuple(prefix)))
        for c in graph.children(v):
            prefix.append(c)
            extend(prefix)
            prefix.pop()

    extend([x])
    return tuple(sorted(out))


def enumerate_treks(graph: ProcessGraph, v: str, w: str) -> tuple[Trek, ...]:
    """All treks from v to w: left side runs into v, right side into w."""
    graph.require_acyclic()
    out: list[Trek] = []
    for top in graph.vertices:
        lefts = enumerate_paths(graph, top, v)
        if not lefts:
            continue
        rights = enumerate_paths(graph, top, w)
        for left in lefts:
            for right in rights:
                out.append(Trek(top, left, right))
    return tuple(sorted(out))


def _system_search(sources, targets, candidates, disjoint_ok, make_system):
    """Backtracking assignment of one candidate object per source.

    candidates: source -> target -> tuple of objects.
    disjoint_ok(used, obj): whether obj can join the partial system.
    """
    targets = list(targets)
    systems = []

    def assign(i, used_targets, chosen):
        if i == len(sources):
            perm = tuple(targets.index(obj_target) for obj_target, _ in chosen)
            systems.append(make_system(tuple(obj for _, obj in chosen), _perm_sign(perm)))
            return
        src = sources[i]
        for t in targets:
            if t in used_targets:
                continue
            for obj in candidates(src, t):
                if disjoint_ok(chosen, obj):
                    assign(i + 1, used_targets | {t}, chosen + [(t, obj)])

    assign(0, frozenset(), [])
    return tuple(systems)


def _ordered(labels) -> tuple[str, ...]:
    # sequences keep their order (it fixes the permutation signs); sets are sorted
    if isinstance(labels, (set, frozenset)):
        return tuple(sorted(labels))
    return tuple(labels)


def nonintersecting_path_systems(graph: ProcessGraph, X, Y) -> tuple[PathSystem, ...]:
    """All systems of vertex-disjoint directed paths from X onto Y, with signs."""
    graph.require_acyclic()
    X, Y = _ordered(X), _ordered(Y)
    if len(X) != len(Y):
        raise ValueError("path systems need |X| = |Y|")
    path_cache = {(x, y): enumerate_paths(graph, x, y) for x in X for y in Y}

    def disjoint_ok(chosen, path: Path) -> bool:
        pv = path.vertex_set()
        return all(pv.isdisjoint(p.vertex_set()) for _, p in chosen)

    return _system_search(
        X, Y, lambda x, y: path_cache[(x, y)], disjoint_ok,
        lambda paths, sign: PathSystem(paths, sign),
    )


def sided_nonintersecting_trek_systems(graph: ProcessGraph, X, Y) -> tuple[TrekSystem, ...]:
    """Trek systems from X onto Y whose left sides are pairwise vertex-disjoint
    and whose right sides are pairwise vertex-disjoint."""
    graph.require_acyclic()
    X, Y = _ordered(X), _ordered(Y)
    if len(X) != len(Y):
        raise ValueError("trek systems need |X| = |Y|")
    trek_cache = {(x, y): enumerate_treks(graph, x, y) for x in X for y in Y}

    def disjoint_ok(chosen, trek: Trek) -> bool:
        lv, rv = trek.left.vertex_set(), trek.right.vertex_set()
        return all(
            lv.isdisjoint(t.left.vertex_set()) and rv.isdisjoint(t.right.vertex_set())
            for _, t in chosen
        )

    return _system_search(
        X, Y, lambda x, y: trek_cache[(x, y)], disjoint_ok,
        lambda treks, sign: TrekSystem(treks, sign),
    )


# -- d-separation ------------------------------------------------------------------


def d_separated(graph: ProcessGraph, X, Y, Z) -> bool:
    """Whether Z blocks every path between X and Y (ancestral moral graph test)."""
    graph.require_acyclic()
    X, Y, Z = frozenset(X), frozenset(Y), frozenset(Z)
    if (X & Y) or (X & Z) or (Y & Z):
        raise ValueError("X, Y, Z must be pairwise disjoint")
    vertices = set(graph.vertices)
    for lab in X | Y | Z:
        if lab not in vertices:
            raise KeyError(f"unknown label {lab!r}")
    if not X or not Y:
        return True
    relevant = graph.ancestral_closure(X | Y | Z)
    neighbours: dict[str, set[str]] = {v: set() for v in relevant}
    for a, b in graph.edges:
        if a in relevant and b in relevant:
            neighbours[a].add(b)
            neighbours[b].add(a)
    for v in relevant:  # moralization: marry parents of a common child
        ps = [p for p in graph.parents(v) if p in relevant]
        for p, q in combinations(ps, 2):
            neighbours[p].add(q)
            neighbours[q].add(p)
    blocked = Z
    stack = [v for v in X if v not in blocked]
    seen = set(stack)
    while stack:
        v = stack.pop()
        if v in Y:
            return False
        for w in neighbours[v]:
            if w not in seen and w not in blocked:
                seen.add(w)
                stack.append(w)
    return True


# -- t-separation ---------------------------------------------------------------------


def t_separated(graph: ProcessGraph, X, Y, Z_X, Z_Y) -> bool:
    """Whether every trek from X to Y hits Z_X on its left or Z_Y on its right side."""
    Z_X, Z_Y = frozenset(Z_X), frozenset(Z_Y)
    for trek in _treks_between(graph, X, Y):
        if not (trek.left.vertex_set() & Z_X) and not (trek.right.vertex_set() & Z_Y):
            return False
    return True


def _treks_between(graph: ProcessGraph, X, Y) -> tuple[Trek, ...]:
    out: list[Trek] = []
    for x in sorted(set(X)):
        for y in sorted(set(Y)):
            out.extend(enumerate_treks(graph, x, y))
    return tuple(out)


def t_separation_min(graph: ProcessGraph, X, Y):
    """A minimizing t-separating pair: (size, Z_X, Z_Y), found by brute force over
    subset pairs in order of total size."""
    graph.require_acyclic()
    treks = _treks_between(graph, X, Y)
    if not treks:
        return 0, (), ()
    sides = [(t.left.vertex_set(), t.right.vertex_set()) for t in treks]
    vertices = tuple(graph.vertices)
    max_size = min(len(frozenset(X)), len(frozenset(Y)))
    for total in range(0, 2 * len(vertices) + 1):
        for left_size in range(0, total + 1):
            right_size = total - left_size
            if left_size > len(vertices) or right_size > len(vertices):
                continue
            for Z_X in combinations(vertices, left_size):
                zx = frozenset(Z_X)
                for Z_Y in combinations(vertices, right_size):
                    zy = frozenset(Z_Y)
                    if all((left & zx) or (right & zy) for left, right in sides):
                        return total, tuple(sorted(zx)), tuple(sorted(zy))
        if total >= max_size:
            # (X, {}) always t-separates, so the loop cannot pass this point
            break
    raise AssertionError("no t-separating pair found; unreachable")


# -- latent-factor half-treks -----------------------------------------------------------


def latent_factor_half_treks(graph: ProcessGraph, a: str, b: str,
                             avoid=frozenset(), allow_trivial: bool = False) -> tuple[Trek, ...]:
    """Treks from a to b whose left side is empty (a directed path) or a single
    latent edge l -> a with l outside `avoid`."""
    graph.require_acyclic()
    latents = set(graph.latent)
    out: list[Trek] = []
    for path in enumerate_paths(graph, a, b):
        if path.is_empty and not allow_trivial:
            continue
        out.append(Trek(a, Path((a,)), path))
    for l in graph.pa_latent(a):
        if l in avoid or l not in latents:
            continue
        left = Path((l, a))
        for right in enumerate_paths(graph, l, b):
            if right.is_empty:
                continue
            out.append(Trek(l, left, right))
    return tuple(sorted(out))


def htr(graph: ProcessGraph, X, avoid=frozenset()) -> frozenset[str]:
    """Observed vertices half-trek reachable from some x in X while avoiding the
    latent set `avoid`; reachability needs at least one edge."""
    graph.require_acyclic()
    avoid = frozenset(avoid)
    observed = set(graph.observed)
    out: set[str] = set()
    for x in sorted(set(X)):
        if x not in observed:
            raise KeyError(f"half-trek sources must be observed, got {x!r}")
        out |= graph.descendants(x)
        for l in graph.pa_latent(x):
            if l not in avoid:
                out |= graph.descendants(l)
    return frozenset(out & observed)


# -- the latent-factor half-trek criterion ------------------------------------------------


@dataclass(frozen=True)
class LfhtcTriple:
    """Candidate sets (Y, W, Lp) for identifying the links into one vertex."""

    Y: tuple[str, ...]
    W: tuple[str, ...]
    Lp: tuple[str, ...]

    @staticmethod
    def make(Y=(), W=(), Lp=()) -> "LfhtcTriple":
        return LfhtcTriple(tuple(sorted(Y)), tuple(sorted(W)), tuple(sorted(Lp)))

    @property
    def is_regression(self) -> bool:
        return not self.W and not self.Lp


@dataclass(frozen=True)
class LfhtcCheck:
    ok: bool
    condition1: bool
    condition2: bool
    condition3: bool

    @property
    def failed(self) -> tuple[str, ...]:
        return tuple(
            name for name, good in [
                ("size-and-parent-overlap", self.condition1),
                ("latent-parent-containment", self.condition2),
                ("half-trek-system", self.condition3),
            ] if not good
        )


def _validate_triple(graph: ProcessGraph, v: str, triple: LfhtcTriple) -> None:
    observed, latents = set(graph.observed), set(graph.latent)
    if v not in observed:
        raise KeyError(f"target vertex {v!r} is not observed")
    for lab in triple.Y + triple.W:
        if lab not in observed:
            raise GraphValidationError(f"triple label {lab!r} is not an observed vertex")
        if lab == v:
            raise GraphValidationError(f"triple may not contain the target vertex {v!r}")
    for lab in triple.Lp:
        if lab not in latents:
            raise GraphValidationError(f"triple label {lab!r} is not a latent vertex")


def _half_trek_system_exists(graph: ProcessGraph, sources, targets, w_targets,
                             allowed_latents) -> bool:
    """Sided-non-intersecting system of latent-factor half-treks from `sources`
    onto `targets`; treks into a target in `w_targets` must be single-edge
    confounding treks y <- l -> w with l in allowed_latents."""
    sources = tuple(sorted(sources))
    targets = tuple(sorted(targets))
    w_targets = frozenset(w_targets)
    cache: dict[tuple[str, str], tuple[Trek, ...]] = {}

    def candidates(src: str, tgt: str) -> tuple[Trek, ...]:
        key = (src, tgt)
        if key not in cache:
            if tgt in w_targets:
                treks = tuple(
                    Trek(l, Path((l, src)), Path((l, tgt)))
                    for l in graph.pa_latent(src)
                    if l in allowed_latents and graph.has_edge(l, tgt)
                )
            else:
                treks = latent_factor_half_treks(graph, src, tgt, allow_trivial=True)
            cache[key] = treks
        return cache[key]

    def disjoint_ok(chosen, trek: Trek) -> bool:
        lv, rv = trek.left.vertex_set(), trek.right.vertex_set()
        return all(
            lv.isdisjoint(t.left.vertex_set()) and rv.isdisjoint(t.right.vertex_set())
            for _, t in chosen
        )

    found = _system_search(sources, targets, candidates, disjoint_ok,
                           lambda treks, sign: True)
    return bool(found)


def lfhtc_check(graph: ProcessGraph, v: str, triple: LfhtcTriple) -> LfhtcCheck:
    """Check the three half-trek-criterion conditions for (Y, W, Lp) at v."""
    graph.require_acyclic()
    _validate_triple(graph, v, triple)
    Y, W, Lp = frozenset(triple.Y), frozenset(triple.W), frozenset(triple.Lp)
    pa = frozenset(graph.pa_observed(v))

    cond1 = (len(Y) == len(pa) + len(Lp)) and (len(W) == len(Lp)) and not (W & pa)

    pa_l_y = frozenset(l for y in Y for l in graph.pa_latent(y))
    pa_l_wv = frozenset(l for u in (W | {v}) for l in graph.pa_latent(u))
    cond2 = not (Y & W) and (pa_l_y & pa_l_wv) <= Lp

    cond3 = False
    if cond1 and cond2:
        cond3 = _half_trek_system_exists(
            graph, Y, pa | W, W, Lp,
        )
    return LfhtcCheck(cond1 and cond2 and cond3, cond1, cond2, cond3)


def lfhtc_prerequisite_heads(graph: ProcessGraph, v: str, triple: LfhtcTriple) -> tuple[str, ...]:
    """Vertices whose incoming observed links must already be identified before
    the triple can be used at v."""
    reach = htr(graph, set(triple.W) | {v}, frozenset(triple.Lp))
    return tuple(sorted(set(triple.W) | (set(triple.Y) & reach)))


def lfhtc_prerequisite_edges(graph: ProcessGraph, v: str, triple: LfhtcTriple) -> tuple[Edge, ...]:
    observed = set(graph.observed)
    return tuple(sorted(
        (x, y)
        for y in lfhtc_prerequisite_heads(graph, v, triple)
        for x in graph.pa_observed(y)
        if x in observed
    ))


def lfhtc_search(graph: ProcessGraph, v: str, solved_edges=frozenset()) -> LfhtcTriple | None:
    """Smallest triple passing lfhtc_check whose prerequisite edges are all solved.

    Enumerates by |Lp| first, then lexicographically by W and Y, so the result
    is deterministic.  Returns None when no usable triple exists.
    """
    graph.require_acyclic()
    solved = frozenset(solved_edges)
    observed = tuple(graph.observed)
    if v not in set(observed):
        raise KeyError(f"target vertex {v!r} is not observed")
    pa = frozenset(graph.pa_observed(v))
    others = tuple(x for x in observed if x != v)
    w_pool = tuple(x for x in others if x not in pa)

    def usable(triple: LfhtcTriple) -> bool:
        if not lfhtc_check(graph, v, triple).ok:
            return False
        return all(e in solved for e in lfhtc_prerequisite_edges(graph, v, triple))

    # canonical regression candidate first
    regression = LfhtcTriple.make(Y=sorted(pa))
    if usable(regression):
        return regression
    for lp_size in range(len(graph.latent) + 1):
        y_size = len(pa) + lp_size
        if y_size > len(others) or lp_size > len(w_pool):
            continue
        for Y in combinations(others, y_size):
            y_set = set(Y)
            for W in combinations(tuple(x for x in w_pool if x not in y_set), lp_size):
                for Lp in combinations(graph.latent, lp_size):
                    triple = LfhtcTriple.make(Y, W, Lp)
                    if triple == regression:
                        continue
                    if usable(triple):
                        return triple
    return None


@dataclass(frozen=True)
class LfhtcOrder:
    """Fixpoint result: solvable vertices in order, plus the unresolved rest."""

    steps: tuple[tuple[str, LfhtcTriple], ...]
    unresolved: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.unresolved


def lfhtc_order(graph: ProcessGraph) -> LfhtcOrder:
    """Iterate lfhtc_search over the observed vertices until no progress."""
    graph.require_acyclic()
    pending = list(graph.observed)
    solved_edges: set[Edge] = set()
    steps: list[tuple[str, LfhtcTriple]] = []
    progress = True
    while progress and pending:
        progress = False
        for v in list(pending):
            triple = lfhtc_search(graph, v, frozenset(solved_edges))
            if triple is None:
                continue
            steps.append((v, triple))
            solved_edges.update((x, v) for x in graph.pa_observed(v))
            pending.remove(v)
            progress = True
    return LfhtcOrder(tuple(steps), tuple(sorted(pending)))


# -- minimal half-trek subsystems ------------------------------------------------------------


def _source_orderable(treks: tuple[Trek, ...]) -> bool:
    """Whether sources can be indexed so each trek only visits lower-indexed ones."""
    sources = [t.source for t in treks]
    visit: dict[int, set[int]] = {i: set() for i in range(len(treks))}
    for i, t in enumerate(treks):
        vs = t.left.vertex_set() | t.right.vertex_set()
        for j, s in enumerate(sources):
            if j != i and s in vs:
                visit[i].add(j)  # j must come before i
    seen: set[int] = set()
    changed = True
    while changed:
        changed = False
        for i in range(len(treks)):
            if i not in seen and visit[i] <= seen:
                seen.add(i)
                changed = True
    return len(seen) == len(treks)


def _is_lf_half_trek(trek: Trek, latents: frozenset[str]) -> bool:
    if trek.left.is_empty:
        return True
    return len(trek.left.vertices) == 2 and trek.top in latents


def minimal_halftrek_subsystem(graph: ProcessGraph, system: TrekSystem) -> TrekSystem:
    """Reduce a sided-non-intersecting half-trek system to one whose edge
    subgraph supports no other trek system between the same end sets.

    The result uses only edges of the input, visits each source exactly once
    on its own trek, and admits a source ordering in which every trek passes
    only through earlier sources.  Among valid reductions the one with the
    fewest edges (ties broken lexicographically) is returned.
    """
    graph.require_acyclic()
    latents = frozenset(graph.latent)
    for trek in system.treks:
        trek.left.validate(graph)
        trek.right.validate(graph)
        if not _is_lf_half_trek(trek, latents):
            raise ValueError(f"trek {trek} is not a latent-factor half-trek")
    sources = tuple(sorted(system.sources))
    targets = tuple(sorted(system.targets))
    sub = graph.with_edges(system.edge_set())

    cache: dict[tuple[str, str], tuple[Trek, ...]] = {}

    def candidates(src: str, tgt: str) -> tuple[Trek, ...]:
        key = (src, tgt)
        if key not in cache:
            cache[key] = latent_factor_half_treks(sub, src, tgt, allow_trivial=True)
        return cache[key]

    def disjoint_ok(chosen, trek: Trek) -> bool:
        lv, rv = trek.left.vertex_set(), trek.right.vertex_set()
        return all(
            lv.isdisjoint(t.left.vertex_set()) and rv.isdisjoint(t.right.vertex_set())
            for _, t in chosen
        )

    all_systems = _system_search(sources, targets, candidates, disjoint_ok,
                                 lambda treks, sign: TrekSystem(treks, sign))
    valid = []
    for cand in all_systems:
        if not all(
            (t.left.vertices + t.right.vertices[1:]).count(t.source) == 1
            for t in cand.treks
        ):
            continue
        if _source_orderable(cand.treks):
            valid.append(cand)
    if not valid:
        raise ValueError("input system admits no orderable half-trek subsystem")
    valid.sort(key=lambda s: (sum(len(t.edges) for t in s.treks), s.treks))
    return valid[0]
