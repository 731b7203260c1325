"""Time-domain SVAR simulation and nonparametric spectral estimation.

Simulation runs the structural recursion directly (contemporaneous effects
resolved in topological order within each step) with Gaussian noise from
numpy's default PCG64 generator, seeded explicitly.  Estimation is a
Welch-style averaged periodogram with a Hann window, evaluated by direct DFT
at arbitrary angular frequencies in [0, pi].

This is the only module that touches floating point; the estimator is
normalized so that it targets the exact spectrum evaluated at exp(-i*theta)
(see `exact_spectrum_values`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CyclicGraphError, TimeSeriesGraph
from .ratlinalg import RatMatrix
from .svar import SvarParams


class SimulationError(ValueError):
    """Simulation preconditions are violated."""


class EstimationError(ValueError):
    """Estimation preconditions are violated (bad segmentation, short series)."""


class IllConditionedBlockError(ArithmeticError):
    """A conditioning block is numerically too ill-conditioned to invert."""


@dataclass(frozen=True)
class SeriesSample:
    """Simulated sample: values[t, i] is vertex labels[i] at time t."""

    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] != len(self.labels):
            raise ValueError("values grid does not match labels")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("series contains non-finite values")

    @property
    def length(self) -> int:
        return self.values.shape[0]

    def column(self, label: str) -> np.ndarray:
        return self.values[:, self.labels.index(label)]

    def select(self, labels) -> "SeriesSample":
        idx = [self.labels.index(l) for l in labels]
        return SeriesSample(tuple(labels), self.values[:, idx])


@dataclass(frozen=True)
class SpectrumEstimate:
    """Per-frequency cross-spectral matrices over the series labels."""

    labels: tuple[str, ...]
    frequencies: tuple[float, ...]
    matrices: np.ndarray  # shape (len(frequencies), n, n), complex
    segment_count: int
    segment_length: int
    window: str = "hann"

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.frequencies, self.frequencies[1:])):
            raise ValueError("frequencies must be strictly increasing")
        n = len(self.labels)
        if self.matrices.shape != (len(self.frequencies), n, n):
            raise ValueError("matrix grid does not match labels/frequencies")
        herm = np.abs(self.matrices - np.conj(np.swapaxes(self.matrices, 1, 2)))
        if herm.max(initial=0.0) > 1e-8:
            raise ValueError("estimated matrices are not Hermitian")

    def matrix_at(self, index: int) -> np.ndarray:
        return self.matrices[index]

    def block(self, index: int, rows, cols) -> np.ndarray:
        ri = [self.labels.index(r) for r in rows]
        ci = [self.labels.index(c) for c in cols]
        return self.matrices[index][np.ix_(ri, ci)]


def _contemporaneous_order(tsg: TimeSeriesGraph) -> tuple[str, ...]:
    """Topological order of the lag-0 edge subgraph; fails on lag-0 cycles."""
    base = tsg.base
    zero_edges = [e for e, lags in tsg.cross_lags.items() if 0 in lags]
    try:
        return base.with_edges(zero_edges).topological_order()
    except CyclicGraphError:
        raise SimulationError("contemporaneous (lag-0) effects contain a cycle") from None


def simulate_series(tsg: TimeSeriesGraph, params: SvarParams, length: int,
                    burn_in: int = 1000, seed: int = 0) -> SeriesSample:
    """Draw one trajectory of the structural recursion; deterministic per seed."""
    if length <= 0:
        raise SimulationError("length must be positive")
    if burn_in < 0:
        raise SimulationError("burn_in must be non-negative")
    labels = tsg.base.vertices
    index = {v: i for i, v in enumerate(labels)}
    order = _contemporaneous_order(tsg)

    # per-vertex accumulation terms (source index, lag, float coefficient)
    terms: dict[str, list[tuple[int, int, float]]] = {v: [] for v in labels}
    for (a, b, k), c in params.cross.items():
        terms[b].append((index[a], k, float(c)))
    for (v, k), c in params.auto.items():
        terms[v].append((index[v], k, float(c)))

    total = burn_in + length
    rng = np.random.default_rng(seed)
    scale = np.array([float(params.noise[v]) for v in labels]) ** 0.5
    noise = rng.standard_normal((total, len(labels))) * scale

    values = np.zeros((total, len(labels)))
    for t in range(total):
        for v in order:
            i = index[v]
            acc = noise[t, i]
            for (j, k, c) in terms[v]:
                if k <= t:
                    acc += c * values[t - k, j]
            values[t, i] = acc
    return SeriesSample(labels, values[burn_in:])


def estimate_spectrum(series: SeriesSample, frequencies, segment_length: int,
                      overlap: float = 0.5) -> SpectrumEstimate:
    """Welch cross-spectral estimate at the given angular frequencies in [0, pi]."""
    freqs = tuple(float(f) for f in frequencies)
    if any(f < 0 or f > np.pi for f in freqs):
        raise EstimationError("frequencies must lie in [0, pi]")
    T = series.length
    if segment_length <= 1 or segment_length > T:
        raise EstimationError(f"segment_length {segment_length} invalid for series of length {T}")
    if not 0 <= overlap < 1:
        raise EstimationError("overlap must be in [0, 1)")
    hop = max(1, int(round(segment_length * (1 - overlap))))
    starts = range(0, T - segment_length + 1, hop)
    window = np.hanning(segment_length)
    norm = float(np.sum(window**2))
    n = len(series.labels)
    grid = np.arange(segment_length)
    kernel = np.exp(-1j * np.outer(grid, np.array(freqs)))  # (L, F)
    acc = np.zeros((len(freqs), n, n), dtype=complex)
    count = 0
    for s in starts:
        seg = series.values[s:s + segment_length] * window[:, None]  # (L, n)
        coeffs = seg.T @ kernel  # (n, F)
        acc += np.einsum("af,bf->fab", coeffs, np.conj(coeffs))
        count += 1
    matrices = acc / (count * norm)
    matrices = 0.5 * (matrices + np.conj(np.swapaxes(matrices, 1, 2)))
    return SpectrumEstimate(series.labels, freqs, matrices, count, segment_length)


def exact_spectrum_values(S: RatMatrix, frequencies) -> np.ndarray:
    """Evaluate an exact spectrum matrix at z = exp(-i*theta) for each theta.

    This is the evaluation convention the Welch estimator targets: its DFT
    kernel exp(-i*theta*n) pairs lag k with z^k at z = exp(-i*theta).
    """
    n = len(S.row_labels)
    out = np.zeros((len(tuple(frequencies)), n, n), dtype=complex)
    for f, theta in enumerate(frequencies):
        z = np.exp(-1j * float(theta))
        for i in range(n):
            for j in range(n):
                out[f, i, j] = complex(S.at(i, j)(z))
    return out


def empirical_ci_test(estimate: SpectrumEstimate, X, Y, Z,
                      threshold: float = 0.1, max_condition: float = 1e10) -> bool:
    """Thresholded numeric conditional-independence verdict.

    Computes the conditional cross-spectrum (Schur complement) at every
    frequency, normalizes each entry by the conditional auto-spectra, and
    reports independence when the largest magnitude stays below the
    threshold.  This decision rule is a placeholder; it is not a calibrated
    statistical test.
    """
    X, Y, Z = sorted(X), sorted(Y), sorted(Z)
    if set(X) & set(Y) or set(X) & set(Z) or set(Y) & set(Z):
        raise ValueError("X, Y, Z must be pairwise disjoint")
    worst = 0.0
    for f in range(len(estimate.frequencies)):
        joint = sorted(set(X) | set(Y))
        S_jj = estimate.block(f, joint, joint)
        if Z:
            S_zz = estimate.block(f, Z, Z)
            if np.linalg.cond(S_zz) > max_condition:
                raise IllConditionedBlockError(
                    f"conditioning block at frequency index {f} has condition number "
                    f"> {max_condition:g}"
                )
            S_jz = estimate.block(f, joint, Z)
            cond = S_jj - S_jz @ np.linalg.solve(S_zz, np.conj(S_jz.T))
        else:
            cond = S_jj
        diag = np.real(np.diag(cond)).clip(min=1e-300)
        xi = [joint.index(x) for x in X]
        yi = [joint.index(y) for y in Y]
        for i in xi:
            for j in yi:
                coherence = abs(cond[i, j]) / np.sqrt(diag[i] * diag[j])
                worst = max(worst, float(coherence))
    return worst < threshold
