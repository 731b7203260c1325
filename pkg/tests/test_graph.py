"""Graph structures, path/trek combinatorics, separations, half-trek criterion."""

import random
from itertools import combinations, product

import pytest

from svarspec.graph import (CyclicGraphError, GraphValidationError,
                            LfhtcTriple, Path, ProcessGraph, TimeSeriesGraph,
                            Trek, TrekSystem, d_separated, enumerate_paths,
                            enumerate_treks, htr, latent_factor_half_treks,
                            lfhtc_check, lfhtc_order, lfhtc_prerequisite_edges,
                            lfhtc_search, minimal_halftrek_subsystem,
                            nonintersecting_path_systems,
                            sided_nonintersecting_trek_systems, t_separated,
                            t_separation_min)

from conftest import random_dag, random_latent_dag


# -- construction invariants -----------------------------------------------------


def test_edge_into_latent_rejected():
    with pytest.raises(GraphValidationError, match="latent"):
        ProcessGraph.make(["a"], ["l"], [("a", "l")])


def test_self_loop_rejected():
    with pytest.raises(GraphValidationError, match="self-loop"):
        ProcessGraph.make(["a"], [], [("a", "a")])


def test_observed_latent_overlap_rejected():
    with pytest.raises(GraphValidationError):
        ProcessGraph.make(["a"], ["a"], [])


def test_unknown_edge_label_rejected():
    with pytest.raises(GraphValidationError):
        ProcessGraph.make(["a"], [], [("a", "b")])


def test_acyclicity_flag_matches_topological_sort():
    dag = ProcessGraph.make(["a", "b", "c"], [], [("a", "b"), ("b", "c")])
    assert dag.is_acyclic and len(dag.topological_order()) == 3
    cyc = ProcessGraph.make(["a", "b"], [], [("a", "b"), ("b", "a")])
    assert not cyc.is_acyclic
    with pytest.raises(CyclicGraphError):
        cyc.topological_order()


def test_tsg_lag_validation():
    g = ProcessGraph.make(["a", "b"], [], [("a", "b")])
    with pytest.raises(GraphValidationError, match="lag"):
        TimeSeriesGraph.make(g, {("a", "b"): (-1,)})
    with pytest.raises(GraphValidationError, match="auto"):
        TimeSeriesGraph.make(g, {("a", "b"): (0,)}, {"a": (0,)})
    with pytest.raises(GraphValidationError, match="empty"):
        TimeSeriesGraph.make(g, {("a", "b"): ()})
    with pytest.raises(GraphValidationError, match="match"):
        TimeSeriesGraph.make(g, {})
    tsg = TimeSeriesGraph.make(g, {("a", "b"): (0, 2)}, {"b": (1,)})
    assert tsg.order == 2


# -- path and trek enumeration ------------------------------------------------------


def test_instrument_graph_single_path(instrument_graph):
    assert enumerate_paths(instrument_graph, "u", "w") == (Path(("u", "v", "w")),)


def test_empty_path_at_every_vertex(instrument_graph):
    assert enumerate_paths(instrument_graph, "u", "u") == (Path(("u",)),)


def test_path_enumeration_rejects_cyclic():
    cyc = ProcessGraph.make(["a", "b"], [], [("a", "b"), ("b", "a")])
    with pytest.raises(CyclicGraphError):
        enumerate_paths(cyc, "a", "b")


def test_path_counts_match_adjacency_powers():
    rng = random.Random(20)
    for _ in range(100):
        n = rng.randint(2, 6)
        g = random_dag(rng, [f"x{i}" for i in range(n)], p=0.5)
        verts = list(g.vertices)
        index = {v: i for i, v in enumerate(verts)}
        # counts[i][j] = number of directed paths i -> j, via powers of adjacency
        adj = [[0] * n for _ in range(n)]
        for a, b in g.edges:
            adj[index[a]][index[b]] = 1
        counts = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        power = [row[:] for row in counts]
        for _ in range(n):
            power = [
                [sum(power[i][k] * adj[k][j] for k in range(n)) for j in range(n)]
                for i in range(n)
            ]
            counts = [
                [counts[i][j] + power[i][j] for j in range(n)] for i in range(n)
            ]
        x, y = rng.sample(verts, 2)
        assert len(enumerate_paths(g, x, y)) == counts[index[x]][index[y]]


def test_instrument_graph_trek_set_is_complete(instrument_graph):
    treks = set(enumerate_treks(instrument_graph, "v", "w"))
    assert Trek("v", Path(("v",)), Path(("v", "w"))) in treks
    assert Trek("l", Path(("l", "v")), Path(("l", "w"))) in treks
    # the definition also admits the through-v treks with tops u and l
    assert len(treks) == 4


def test_trivial_trek_present(instrument_graph):
    treks = enumerate_treks(instrument_graph, "v", "v")
    assert Trek("v", Path(("v",)), Path(("v",))) in treks


def test_trek_counts_match_path_products():
    rng = random.Random(21)
    for _ in range(50):
        g = random_dag(rng, [f"x{i}" for i in range(rng.randint(2, 5))], p=0.6)
        verts = list(g.vertices)
        v, w = rng.choice(verts), rng.choice(verts)
        expected = sum(
            len(enumerate_paths(g, top, v)) * len(enumerate_paths(g, top, w))
            for top in verts
        )
        assert len(enumerate_treks(g, v, w)) == expected


# -- systems with signs ------------------------------------------------------------------


def test_identity_path_system_on_isolated_vertices():
    g = ProcessGraph.make(["a", "b"], [], [])
    systems = nonintersecting_path_systems(g, ["a", "b"], ["a", "b"])
    assert len(systems) == 1
    assert systems[0].sign == 1
    assert all(p.is_empty for p in systems[0].paths)


def test_shared_middle_vertex_blocks_all_systems():
    g = ProcessGraph.make(["x1", "x2", "m", "y1", "y2"], [],
                          [("x1", "m"), ("m", "y1"), ("x2", "m"), ("m", "y2")])
    assert nonintersecting_path_systems(g, ["x1", "x2"], ["y1", "y2"]) == ()


def _brute_force_path_systems(g, X, Y):
    X, Y = tuple(sorted(X)), tuple(sorted(Y))
    out = []
    path_sets = {x: {y: enumerate_paths(g, x, y) for y in Y} for x in X}
    for perm in _permutations_with_signs(len(X)):
        targets = [Y[perm[i]] for i in range(len(X))]
        if len(set(targets)) != len(targets):
            continue
        for chosen in product(*[path_sets[x][t] for x, t in zip(X, targets)]):
            vsets = [p.vertex_set() for p in chosen]
            if all(a.isdisjoint(b) for a, b in combinations(vsets, 2)):
                out.append((tuple(chosen), _sign_of(perm)))
    return out


def _permutations_with_signs(n):
    from itertools import permutations
    return [tuple(p) for p in permutations(range(n))]


def _sign_of(perm):
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def test_path_systems_match_brute_force():
    rng = random.Random(22)
    for _ in range(40):
        n = rng.randint(2, 6)
        g = random_dag(rng, [f"x{i}" for i in range(n)], p=0.5)
        k = rng.randint(1, min(3, n))
        X = tuple(sorted(rng.sample(list(g.vertices), k)))
        Y = tuple(sorted(rng.sample(list(g.vertices), k)))
        got = {(s.paths, s.sign) for s in nonintersecting_path_systems(g, X, Y)}
        want = {(paths, sign) for paths, sign in _brute_force_path_systems(g, X, Y)}
        assert got == want


def _brute_force_trek_systems(g, X, Y):
    X, Y = tuple(sorted(X)), tuple(sorted(Y))
    trek_sets = {x: {y: enumerate_treks(g, x, y) for y in Y} for x in X}
    out = []
    for perm in _permutations_with_signs(len(X)):
        targets = [Y[perm[i]] for i in range(len(X))]
        if len(set(targets)) != len(targets):
            continue
        for chosen in product(*[trek_sets[x][t] for x, t in zip(X, targets)]):
            lefts = [t.left.vertex_set() for t in chosen]
            rights = [t.right.vertex_set() for t in chosen]
            if all(a.isdisjoint(b) for a, b in combinations(lefts, 2)) and \
               all(a.isdisjoint(b) for a, b in combinations(rights, 2)):
                out.append((tuple(chosen), _sign_of(perm)))
    return out


def test_trek_systems_match_brute_force():
    rng = random.Random(23)
    for _ in range(25):
        n = rng.randint(2, 5)
        g = random_dag(rng, [f"x{i}" for i in range(n)], p=0.5)
        k = rng.randint(1, 2)
        X = tuple(sorted(rng.sample(list(g.vertices), k)))
        Y = tuple(sorted(rng.sample(list(g.vertices), k)))
        got = {(s.treks, s.sign) for s in sided_nonintersecting_trek_systems(g, X, Y)}
        want = set(_brute_force_trek_systems(g, X, Y))
        assert got == want


def test_confounded_chain_trek_system_present(confounded_chain_graph):
    systems = sided_nonintersecting_trek_systems(confounded_chain_graph, ["v2", "v3"], ["v1", "v3"])
    wanted = {
        Trek("l", Path(("l", "v2")), Path(("l", "v1"))),
        Trek("v3", Path(("v3",)), Path(("v3",))),
    }
    assert any(set(s.treks) == wanted for s in systems)


def test_target_transposition_flips_sign():
    rng = random.Random(24)
    flips = 0
    for _ in range(40):
        g = random_dag(rng, [f"x{i}" for i in range(4)], p=0.7)
        X = tuple(sorted(rng.sample(list(g.vertices), 2)))
        Y = tuple(sorted(rng.sample(list(g.vertices), 2)))
        forward = nonintersecting_path_systems(g, X, Y)
        if not forward:
            continue
        swapped = nonintersecting_path_systems(g, X, (Y[1], Y[0]))
        by_paths = {s.paths: s.sign for s in swapped}
        for s in forward:
            assert by_paths[s.paths] == -s.sign
            flips += 1
    assert flips > 0


# -- d-separation --------------------------------------------------------------------------


def test_dsep_chain_and_single_edge(chain_graph):
    assert d_separated(chain_graph, {"a"}, {"c"}, {"b"}) is True
    single = ProcessGraph.make(["a", "b"], [], [("a", "b")])
    assert d_separated(single, {"a"}, {"b"}, set()) is False


def test_dsep_instrument_graph(instrument_graph):
    assert d_separated(instrument_graph, {"u"}, {"w"}, {"v", "l"}) is True
    assert d_separated(instrument_graph, {"u"}, {"w"}, {"v"}) is False  # collider v opened


def test_dsep_overlapping_sets_rejected(chain_graph):
    with pytest.raises(ValueError):
        d_separated(chain_graph, {"a"}, {"a"}, set())


def _blocked(g, path, Z):
    anc_z = g.ancestral_closure(Z)
    for i in range(1, len(path) - 1):
        prev_vertex, vertex, nxt = path[i - 1], path[i], path[i + 1]
        into_prev = g.has_edge(prev_vertex, vertex)
        into_next = g.has_edge(nxt, vertex)
        collider = into_prev and into_next
        if collider and vertex not in anc_z:
            return True
        if not collider and vertex in Z:
            return True
    return False


def _all_undirected_paths(g, x, y):
    neighbours = {v: set() for v in g.vertices}
    for a, b in g.edges:
        neighbours[a].add(b)
        neighbours[b].add(a)
    out = []

    def walk(path):
        v = path[-1]
        if v == y:
            out.append(tuple(path))
            return
        for w in sorted(neighbours[v]):
            if w not in path:
                path.append(w)
                walk(path)
                path.pop()

    walk([x])
    return out


def _dsep_by_path_blocking(g, X, Y, Z):
    # exhaustive oracle: every simple undirected path between the sets is blocked
    return all(
        _blocked(g, path, Z)
        for x in X for y in Y
        for path in _all_undirected_paths(g, x, y)
    )


def test_dsep_matches_exhaustive_path_blocking():
    rng = random.Random(25)
    for _ in range(40):
        n = rng.randint(3, 5)
        g = random_dag(rng, [f"x{i}" for i in range(n)], p=0.5)
        verts = list(g.vertices)
        for _ in range(10):
            pool = verts[:]
            rng.shuffle(pool)
            x, y = pool[0], pool[1]
            rest = pool[2:]
            Z = set(rng.sample(rest, rng.randint(0, len(rest))))
            assert d_separated(g, {x}, {y}, Z) == _dsep_by_path_blocking(g, {x}, {y}, Z)


def test_dsep_equals_partitioned_tsep():
    # d-separation by Z is equivalent to some split of Z t-separating X u Z from Y u Z
    rng = random.Random(26)
    for _ in range(12):
        n = rng.randint(3, 5)
        g = random_dag(rng, [f"x{i}" for i in range(n)], p=0.5)
        verts = list(g.vertices)
        for X_set, Y_set, Z_set in _all_disjoint_triples(verts, max_each=2):
            want = d_separated(g, X_set, Y_set, Z_set)
            found = False
            zl = sorted(Z_set)
            for mask in range(2 ** len(zl)):
                Z_X = {zl[i] for i in range(len(zl)) if mask >> i & 1}
                Z_Y = Z_set - Z_X
                if t_separated(g, X_set | Z_set, Y_set | Z_set, Z_X, Z_Y):
                    found = True
                    break
            assert found == want


def _all_disjoint_triples(verts, max_each=2):
    out = []
    for xs in range(1, max_each + 1):
        for ys in range(1, max_each + 1):
            for X in combinations(verts, xs):
                rest = [v for v in verts if v not in X]
                for Y in combinations(rest, ys):
                    rest2 = [v for v in rest if v not in Y]
                    for zs in range(0, min(len(rest2), max_each) + 1):
                        for Z in combinations(rest2, zs):
                            out.append((set(X), set(Y), set(Z)))
    return out


# -- t-separation -----------------------------------------------------------------------------


def test_tsep_disconnected_is_zero():
    g = ProcessGraph.make(["a", "b"], [], [])
    assert t_separation_min(g, {"a"}, {"b"}) == (0, (), ())


def test_tsep_instrument_graph(instrument_graph):
    size, zx, zy = t_separation_min(instrument_graph, {"v"}, {"w"})
    assert size == 1
    assert t_separated(instrument_graph, {"v"}, {"w"}, set(zx), set(zy))


def test_tsep_brute_force_cover_property():
    rng = random.Random(27)
    for _ in range(20):
        g = random_dag(rng, [f"x{i}" for i in range(4)], p=0.6)
        verts = list(g.vertices)
        X = set(rng.sample(verts, 2))
        Y = set(rng.sample(verts, 2))
        size, zx, zy = t_separation_min(g, X, Y)
        assert t_separated(g, X, Y, set(zx), set(zy))
        assert len(zx) + len(zy) == size
        # minimality: no smaller pair separates
        for total in range(size):
            for a in range(total + 1):
                for Z_X in combinations(verts, a):
                    for Z_Y in combinations(verts, total - a):
                        assert not t_separated(g, X, Y, set(Z_X), set(Z_Y))


# -- half-trek reachability and the criterion ------------------------------------------------------


def test_htr_no_edges_is_empty():
    g = ProcessGraph.make(["a", "b"], [], [])
    assert htr(g, {"a"}, frozenset()) == frozenset()


def test_htr_confounded_chain(confounded_chain_graph):
    assert {"v2", "v3", "v4", "v5"} <= htr(confounded_chain_graph, {"v1"}, frozenset())
    assert htr(confounded_chain_graph, {"v1", "v4"}, frozenset({"l"})) == frozenset({"v5"})


def test_htr_monotone_in_avoided_latents():
    rng = random.Random(28)
    for _ in range(20):
        g = random_latent_dag(rng, [f"x{i}" for i in range(4)], ["l0", "l1"], p=0.4)
        x = rng.choice(list(g.observed))
        small = htr(g, {x}, frozenset())
        mid = htr(g, {x}, frozenset({"l0"}))
        big = htr(g, {x}, frozenset({"l0", "l1"}))
        assert big <= mid <= small


def test_lfhtc_parentless_vertex_empty_triple(confounded_chain_graph):
    assert lfhtc_check(confounded_chain_graph, "v1", LfhtcTriple.make()).ok


def test_lfhtc_confounded_chain_v4_triple(confounded_chain_graph):
    triple = LfhtcTriple.make(Y=["v2", "v3"], W=["v1"], Lp=["l"])
    assert lfhtc_check(confounded_chain_graph, "v4", triple).ok


def test_lfhtc_condition3_fails_without_confounding_edge(confounded_chain_graph):
    triple = LfhtcTriple.make(Y=["v2", "v3"], W=["v1"], Lp=["l"])
    pruned = confounded_chain_graph.with_edges([e for e in confounded_chain_graph.edges if e != ("l", "v1")])
    result = lfhtc_check(pruned, "v4", triple)
    assert not result.ok
    assert result.failed == ("half-trek-system",)


def test_lfhtc_malformed_triple_rejected(confounded_chain_graph):
    with pytest.raises(GraphValidationError):
        lfhtc_check(confounded_chain_graph, "v4", LfhtcTriple.make(Y=["l"]))
    with pytest.raises(GraphValidationError):
        lfhtc_check(confounded_chain_graph, "v4", LfhtcTriple.make(Y=["v4"]))


def test_lfhtc_search_regression_on_fully_observed():
    rng = random.Random(29)
    for _ in range(10):
        g = random_dag(rng, [f"x{i}" for i in range(4)], p=0.6)
        for v in g.observed:
            triple = lfhtc_search(g, v)
            assert triple == LfhtcTriple.make(Y=g.pa_observed(v))


def test_lfhtc_search_confounded_chain(confounded_chain_graph):
    assert lfhtc_search(confounded_chain_graph, "v4") == LfhtcTriple.make(["v2", "v3"], ["v1"], ["l"])
    assert lfhtc_search(confounded_chain_graph, "v3") is None
    after = lfhtc_search(confounded_chain_graph, "v3", frozenset({("v3", "v4")}))
    assert after == LfhtcTriple.make(["v1", "v2"], ["v4"], ["l"])


def test_lfhtc_order_confounded_chain(confounded_chain_graph):
    order = lfhtc_order(confounded_chain_graph)
    assert order.ok
    assert [v for v, _ in order.steps] == ["v1", "v2", "v4", "v5", "v3"]
    triples = dict(order.steps)
    assert triples["v4"] == LfhtcTriple.make(["v2", "v3"], ["v1"], ["l"])
    assert triples["v3"] == LfhtcTriple.make(["v1", "v2"], ["v4"], ["l"])


def test_lfhtc_order_topological_on_dag():
    g = ProcessGraph.make(["a", "b", "c"], [], [("a", "b"), ("b", "c"), ("a", "c")])
    order = lfhtc_order(g)
    assert order.ok
    assert [v for v, _ in order.steps] == ["a", "b", "c"]
    assert all(t.is_regression for _, t in order.steps)


def test_lfhtc_unidentifiable_reported():
    # single confounded edge with no instrument: exhaustive search finds nothing
    g = ProcessGraph.make(["u", "v"], ["l"], [("u", "v"), ("l", "u"), ("l", "v")])
    order = lfhtc_order(g)
    assert order.unresolved == ("v",)
    assert lfhtc_search(g, "v") is None


def test_prerequisite_edges_confounded_chain(confounded_chain_graph):
    triple = LfhtcTriple.make(["v1", "v2"], ["v4"], ["l"])
    assert lfhtc_prerequisite_edges(confounded_chain_graph, "v3", triple) == (("v3", "v4"),)


# -- minimal half-trek subsystems ----------------------------------------------------------------------


def test_minimal_subsystem_keeps_minimal_input(confounded_chain_graph):
    system = TrekSystem((
        Trek("l", Path(("l", "v2")), Path(("l", "v1"))),
        Trek("v3", Path(("v3",)), Path(("v3",))),
    ), 1)
    reduced = minimal_halftrek_subsystem(confounded_chain_graph, system)
    assert set(reduced.treks) == set(system.treks)


def test_minimal_subsystem_excises_source_revisit():
    # the confounded trek revisits its own source; the directed suffix replaces it
    g = ProcessGraph.make(["x", "y"], ["l"], [("l", "x"), ("x", "y"), ("l", "y")])
    system = TrekSystem((Trek("l", Path(("l", "x")), Path(("l", "x", "y"))),), 1)
    reduced = minimal_halftrek_subsystem(g, system)
    assert reduced.treks == (Trek("x", Path(("x",)), Path(("x", "y"))),)
    assert reduced.treks[0].edges == (("x", "y"),)  # edge subset of the input


def test_minimal_subsystem_rejects_non_half_trek(instrument_graph):
    bad = TrekSystem((Trek("u", Path(("u", "v")), Path(("u", "v", "w"))),), 1)
    with pytest.raises(ValueError):
        minimal_halftrek_subsystem(instrument_graph, bad)


def test_latent_factor_half_trek_shapes(confounded_chain_graph):
    treks = latent_factor_half_treks(confounded_chain_graph, "v2", "v4")
    # directed: v2 -> v3 -> v4; confounded: v2 <- l -> ... -> v4
    shapes = {(t.top, t.left.vertices, t.right.vertices) for t in treks}
    assert ("v2", ("v2",), ("v2", "v3", "v4")) in shapes
    assert ("l", ("l", "v2"), ("l", "v4")) in shapes
    assert all(t.left.is_empty or (len(t.left.vertices) == 2 and t.top == "l") for t in treks)
