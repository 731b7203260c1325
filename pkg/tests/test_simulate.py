"""Time-domain simulation, Welch estimation, and the empirical CI test."""

import random
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from svarspec.graph import ProcessGraph, TimeSeriesGraph
from svarspec.identify import spectral_ci_oracle
from svarspec.simulate import (EstimationError, IllConditionedBlockError,
                               SeriesSample, SimulationError,
                               empirical_ci_test, estimate_spectrum,
                               exact_spectrum_values, simulate_series)
from svarspec.svar import SvarParams, sample_stable_params, spectrum

from conftest import random_dag, random_tsg


def chain_benchmark():
    """A fixed, well-conditioned 3-node chain used by the estimation tests."""
    graph = ProcessGraph.make(["a", "b", "c"], [], [("a", "b"), ("b", "c")])
    tsg = TimeSeriesGraph.full(graph, 1)
    params = SvarParams.make(
        {("a", "b", 0): Fraction(1), ("a", "b", 1): Fraction(1, 4),
         ("b", "c", 0): Fraction(-3, 4), ("b", "c", 1): Fraction(1, 4)},
        {("a", 1): Fraction(1, 4), ("b", 1): Fraction(-1, 4), ("c", 1): Fraction(1, 4)},
        {"a": Fraction(1), "b": Fraction(1, 2), "c": Fraction(3, 4)},
    )
    params.validate(tsg)
    return tsg, params


BENCH_FREQUENCIES = tuple(np.linspace(0.25, 2.9, 8))


# -- simulation ---------------------------------------------------------------------


def test_white_noise_sample_variance():
    g = ProcessGraph.make(["x"], [], [])
    tsg = TimeSeriesGraph.make(g, {})
    p = SvarParams.make({}, {}, {"x": Fraction(9, 4)})
    s = simulate_series(tsg, p, length=10**5, burn_in=10, seed=2)
    assert abs(s.values.var() - 2.25) / 2.25 < 0.05


def test_zero_noise_degenerate_series():
    g = ProcessGraph.make(["x"], [], [])
    tsg = TimeSeriesGraph.make(g, {})
    p = SvarParams(cross={}, auto={}, noise={"x": Fraction(0)})  # test-only override
    s = simulate_series(tsg, p, length=200, burn_in=10, seed=3)
    assert np.all(s.values == 0.0)


def test_ar1_autocorrelation():
    g = ProcessGraph.make(["x"], [], [])
    tsg = TimeSeriesGraph.make(g, {}, {"x": (1,)})
    p = SvarParams.make({}, {("x", 1): Fraction(1, 2)}, {"x": Fraction(1)})
    s = simulate_series(tsg, p, length=10**5, burn_in=500, seed=1)
    x = s.values[:, 0]
    lag1 = np.corrcoef(x[1:], x[:-1])[0, 1]
    assert abs(lag1 - 0.5) < 0.02


def test_seed_determinism():
    tsg, p = chain_benchmark()
    a = simulate_series(tsg, p, length=2000, burn_in=100, seed=7)
    b = simulate_series(tsg, p, length=2000, burn_in=100, seed=7)
    c = simulate_series(tsg, p, length=2000, burn_in=100, seed=8)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_contemporaneous_cycle_rejected():
    g = ProcessGraph.make(["a", "b"], [], [("a", "b"), ("b", "a")])
    tsg = TimeSeriesGraph.make(g, {("a", "b"): (0,), ("b", "a"): (0, 1)})
    p = SvarParams.make(
        {("a", "b", 0): Fraction(1, 4), ("b", "a", 0): Fraction(1, 4),
         ("b", "a", 1): Fraction(1, 8)},
        {}, {"a": Fraction(1), "b": Fraction(1)},
    )
    with pytest.raises(SimulationError, match="cycle"):
        simulate_series(tsg, p, length=100, seed=0)


def test_lagged_cycle_simulates():
    g = ProcessGraph.make(["a", "b"], [], [("a", "b"), ("b", "a")])
    tsg = TimeSeriesGraph.make(g, {("a", "b"): (1,), ("b", "a"): (1,)})
    p = SvarParams.make(
        {("a", "b", 1): Fraction(1, 3), ("b", "a", 1): Fraction(1, 3)},
        {}, {"a": Fraction(1), "b": Fraction(1)},
    )
    s = simulate_series(tsg, p, length=5000, burn_in=200, seed=4)
    assert s.length == 5000


def test_latents_are_simulated(instrument_tsg):
    p = sample_stable_params(instrument_tsg, seed=5)
    s = simulate_series(instrument_tsg, p, length=1000, burn_in=100, seed=5)
    assert s.labels == ("l", "u", "v", "w")
    assert s.column("l").std() > 0


# -- estimation --------------------------------------------------------------------------


def test_flat_spectrum_for_white_noise():
    g = ProcessGraph.make(["x"], [], [])
    tsg = TimeSeriesGraph.make(g, {})
    p = SvarParams.make({}, {}, {"x": Fraction(1)})
    s = simulate_series(tsg, p, length=2**16, burn_in=10, seed=6)
    est = estimate_spectrum(s, np.linspace(0.3, 2.8, 6), segment_length=256)
    assert np.all(np.abs(est.matrices[:, 0, 0].real - 1.0) < 0.10)


def test_estimates_hermitian_and_psd():
    tsg, p = chain_benchmark()
    s = simulate_series(tsg, p, length=2**14, burn_in=500, seed=7)
    est = estimate_spectrum(s, BENCH_FREQUENCIES, segment_length=128)
    for m in est.matrices:
        assert np.allclose(m, m.conj().T, atol=1e-10)
        assert np.linalg.eigvalsh(m).min() >= -1e-8


def test_chain_benchmark_relative_error():
    tsg, p = chain_benchmark()
    exact = exact_spectrum_values(spectrum(tsg, p).S, BENCH_FREQUENCIES)
    s = simulate_series(tsg, p, length=2**16, burn_in=1000, seed=5)
    est = estimate_spectrum(s, BENCH_FREQUENCIES, segment_length=128)
    relative = np.abs(est.matrices - exact) / np.abs(exact)
    assert relative.max() < 0.15


def test_error_shrinks_as_segment_count_doubles():
    tsg, p = chain_benchmark()
    exact = exact_spectrum_values(spectrum(tsg, p).S, BENCH_FREQUENCIES)
    previous = None
    for k in range(4):
        errors = []
        for seed in (5, 6, 7):
            s = simulate_series(tsg, p, length=2**12 * 2**k, burn_in=1000, seed=seed)
            est = estimate_spectrum(s, BENCH_FREQUENCIES, segment_length=256)
            errors.append(np.abs(est.matrices - exact))
        median = float(np.median(np.concatenate(errors)))
        if previous is not None:
            assert median < previous
        previous = median


def test_segmentation_validation():
    tsg, p = chain_benchmark()
    s = simulate_series(tsg, p, length=100, burn_in=10, seed=8)
    with pytest.raises(EstimationError):
        estimate_spectrum(s, [0.5], segment_length=128)
    with pytest.raises(EstimationError):
        estimate_spectrum(s, [4.0], segment_length=32)  # outside [0, pi]
    with pytest.raises(EstimationError):
        estimate_spectrum(s, [0.5], segment_length=32, overlap=1.0)


def test_frequencies_must_increase():
    with pytest.raises(ValueError, match="increasing"):
        from svarspec.simulate import SpectrumEstimate
        SpectrumEstimate(("x",), (1.0, 0.5), np.zeros((2, 1, 1), dtype=complex), 1, 8)


# -- empirical conditional independence ----------------------------------------------------------


def test_empirical_ci_chain_verdicts():
    tsg, p = chain_benchmark()
    s = simulate_series(tsg, p, length=2**16, burn_in=1000, seed=5)
    est = estimate_spectrum(s, BENCH_FREQUENCIES, segment_length=128)
    assert empirical_ci_test(est, {"a"}, {"c"}, {"b"}, threshold=0.1) is True
    assert empirical_ci_test(est, {"a"}, {"b"}, set(), threshold=0.1) is False
    assert empirical_ci_test(est, {"a"}, {"c"}, set(), threshold=0.1) is False


def test_empirical_ci_matches_exact_oracle_mostly():
    rng = random.Random(15)
    total = agreements = 0
    for trial in range(20):
        g = random_dag(rng, ["a", "b", "c", "d"], p=0.5)
        tsg = random_tsg(rng, g)
        p = sample_stable_params(tsg, seed=trial + 900, magnitude_bound=Fraction(1, 2))
        s = simulate_series(tsg, p, length=2**16, burn_in=1000, seed=trial)
        est = estimate_spectrum(s, BENCH_FREQUENCIES, segment_length=128)
        oracle = spectral_ci_oracle(spectrum(tsg, p).S)
        for x, y in combinations(g.observed, 2):
            rest = [v for v in g.observed if v not in (x, y)]
            for size in range(len(rest) + 1):
                for Z in combinations(rest, size):
                    want = oracle(frozenset({x}), frozenset({y}), frozenset(Z))
                    got = empirical_ci_test(est, {x}, {y}, set(Z), threshold=0.1)
                    agreements += (want == got)
                    total += 1
    assert agreements / total >= 0.9


def test_empirical_ci_ill_conditioned_block():
    tsg, p = chain_benchmark()
    s = simulate_series(tsg, p, length=2**12, burn_in=100, seed=9)
    # duplicate one column: the conditioning block becomes numerically singular
    values = np.column_stack([s.values, s.values[:, 1]])
    doubled = SeriesSample(("a", "b", "c", "b2"), values)
    est = estimate_spectrum(doubled, BENCH_FREQUENCIES, segment_length=64)
    with pytest.raises(IllConditionedBlockError):
        empirical_ci_test(est, {"a"}, {"c"}, {"b", "b2"}, threshold=0.1)


def test_simulation_length_validation():
    tsg, p = chain_benchmark()
    with pytest.raises(SimulationError):
        simulate_series(tsg, p, length=0, seed=0)
    with pytest.raises(SimulationError):
        simulate_series(tsg, p, length=10, burn_in=-1, seed=0)
