"""Ground-truth scorers: a synthetic Potts fitness landscape and a score cache.

The landscape stands in for an expensive black-box scorer. Raw energies are
mapped through a logistic into (0,1) using the landscape's *exact* mean and
standard deviation under uniform random sequences, so 0.5 means "as good as
random" and every downstream threshold keeps its meaning.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .core import Sequence


class ScorerError(RuntimeError):
    """A scorer failed; training runs abort cleanly on this."""


@dataclass(frozen=True)
class ScoreReport:
    """Scalar score in (0,1] plus an optional per-residue confidence in (0,100]."""

    score: float
    confidence: tuple[float, ...] | None = None

    def __post_init__(self):
        if not 0.0 < self.score <= 1.0:
            raise ValueError(f"score {self.score} outside (0, 1]")


class Scorer:
    """Base scorer: subclasses implement ``_score_batch`` on (B, L_s) int arrays."""

    name = "scorer"

    def __init__(self):
        self.queries = 0

    def score_batch(self, seqs: np.ndarray) -> np.ndarray:
        seqs = np.atleast_2d(np.asarray(seqs, dtype=np.int64))
        scores = self._score_batch(seqs)
        self.queries += seqs.shape[0]
        return scores

    def _score_batch(self, seqs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def report(self, seq: Sequence) -> ScoreReport:
        score = float(self.score_batch(seq.to_array()[None, :])[0])
        return ScoreReport(score=score)


def _zero_sum_gauge(table: np.ndarray) -> np.ndarray:
    """Remove row/column means so coupling terms are uncorrelated under
    uniform sequences, which makes the landscape moments exact."""
    return table - table.mean(axis=1, keepdims=True) - table.mean(axis=0, keepdims=True) + table.mean()


class PottsLandscape:
    """Seeded random fields + pairwise couplings over an edge set.

    Edges are all adjacent pairs (i, i+1) plus ``2 * L_s`` seeded long-range
    pairs (fewer when the sequence is too short to supply them).
    """

    # default coupling scale keeps enough variance in the per-site fields
    # that a ~15k-parameter proxy can meaningfully track the landscape
    def __init__(self, seq_len: int, n_symbols: int, seed: int,
                 field_scale: float = 1.0, coupling_scale: float = 0.5):
        if seq_len < 1 or n_symbols < 2:
            raise ValueError("need seq_len >= 1 and n_symbols >= 2")
        self.seq_len = seq_len
        self.n_symbols = n_symbols
        self.seed = seed
        rng = np.random.default_rng(seed)

        self.fields = field_scale * rng.standard_normal((seq_len, n_symbols))

        adjacent = [(i, i + 1) for i in range(seq_len - 1)]
        candidates = [(i, j) for i in range(seq_len) for j in range(i + 2, seq_len)]
        n_long = min(2 * seq_len, len(candidates))
        if n_long:
            chosen = rng.choice(len(candidates), size=n_long, replace=False)
            long_range = [candidates[k] for k in sorted(chosen)]
        else:
            long_range = []
        self.edges = adjacent + long_range
        self.n_adjacent = len(adjacent)

        raw = coupling_scale * rng.standard_normal((len(self.edges), n_symbols, n_symbols))
        self.couplings = np.stack([_zero_sum_gauge(t) for t in raw]) if len(self.edges) else raw

        # exact moments of the energy under i.i.d. uniform residues: gauged
        # coupling terms have zero mean and are uncorrelated with everything
        self.mu = float(self.fields.mean(axis=1).sum())
        var = float(self.fields.var(axis=1).sum())
        if len(self.edges):
            var += float((self.couplings ** 2).mean(axis=(1, 2)).sum())
        self.sigma = float(np.sqrt(var)) if var > 0 else 1.0

    def energy_batch(self, seqs: np.ndarray) -> np.ndarray:
        seqs = np.atleast_2d(np.asarray(seqs, dtype=np.int64))
        if seqs.shape[1] != self.seq_len:
            raise ScorerError(f"sequence length {seqs.shape[1]} != landscape length {self.seq_len}")
        e = self.fields[np.arange(self.seq_len)[None, :], seqs].sum(axis=1)
        if self.edges:
            ii = np.array([i for i, _ in self.edges])
            jj = np.array([j for _, j in self.edges])
            eidx = np.arange(len(self.edges))[None, :]
            e = e + self.couplings[eidx, seqs[:, ii], seqs[:, jj]].sum(axis=1)
        return e

    def score_batch(self, seqs: np.ndarray) -> np.ndarray:
        z = (self.energy_batch(seqs) - self.mu) / self.sigma
        return 1.0 / (1.0 + np.exp(-z))

    def site_energies(self, seq: np.ndarray) -> np.ndarray:
        """Per-site contribution: field plus half of each incident coupling."""
        seq = np.asarray(seq, dtype=np.int64)
        contrib = self.fields[np.arange(self.seq_len), seq].copy()
        for (i, j), table in zip(self.edges, self.couplings):
            half = 0.5 * table[seq[i], seq[j]]
            contrib[i] += half
            contrib[j] += half
        return contrib


class PottsScorer(Scorer):
    """Scorer view of a landscape, with per-residue confidence reports."""

    name = "synthetic"

    def __init__(self, landscape: PottsLandscape):
        super().__init__()
        self.landscape = landscape
        # per-site moments for the confidence channel
        ls = landscape
        site_var = ls.fields.var(axis=1).copy()
        site_mean = ls.fields.mean(axis=1).copy()
        for (i, j), table in zip(ls.edges, ls.couplings):
            quarter = 0.25 * float((table ** 2).mean())
            site_var[i] += quarter
            site_var[j] += quarter
        self._site_mu = site_mean
        self._site_sigma = np.sqrt(np.maximum(site_var, 1e-12))

    def _score_batch(self, seqs: np.ndarray) -> np.ndarray:
        return self.landscape.score_batch(seqs)

    def report(self, seq: Sequence) -> ScoreReport:
        arr = seq.to_array()
        score = float(self.score_batch(arr[None, :])[0])
        z = (self.landscape.site_energies(arr) - self._site_mu) / self._site_sigma
        conf = 100.0 / (1.0 + np.exp(-z))
        return ScoreReport(score=score, confidence=tuple(float(c) for c in conf))


def potts_score(landscape: PottsLandscape, seq: Sequence) -> ScoreReport:
    """Score a single sequence against the landscape."""
    score = float(landscape.score_batch(seq.to_array()[None, :])[0])
    return ScoreReport(score=score)


def enumerate_optimum(landscape: PottsLandscape, chunk: int = 4096) -> tuple[np.ndarray, float]:
    """Exhaustive argmax over all sequences; only viable at small L_a ** L_s."""
    ls, la = landscape.seq_len, landscape.n_symbols
    total = la ** ls
    if total > 2 ** 22:
        raise ValueError(f"{total} sequences is too many to enumerate")
    best_seq, best_score = None, -np.inf
    place = la ** np.arange(ls - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        seqs = (idx[:, None] // place[None, :]) % la
        scores = landscape.score_batch(seqs)
        k = int(np.argmax(scores))
        if scores[k] > best_score:
            best_score = float(scores[k])
            best_seq = seqs[k].copy()
    return best_seq, best_score


def twin_landscapes(seed: int, seq_len: int, n_symbols: int
                    ) -> tuple[PottsLandscape, PottsLandscape]:
    """Oracle/decoy pair: shared fields and adjacent couplings, negated
    long-range couplings, so hill-climbing one misleads about the other.

    At enumerable sizes the construction walks derived seeds until the two
    global optima are at Hamming distance >= L_s / 2 (and the oracle strictly
    prefers its own optimum); larger instances use the first construction.
    """
    attempt = seed
    while True:
        # strong couplings: negating the long-range half must move the optimum
        oracle = PottsLandscape(seq_len, n_symbols, attempt, coupling_scale=1.0)
        decoy = PottsLandscape.__new__(PottsLandscape)
        decoy.seq_len = oracle.seq_len
        decoy.n_symbols = oracle.n_symbols
        decoy.seed = oracle.seed
        decoy.fields = oracle.fields
        decoy.edges = oracle.edges
        decoy.n_adjacent = oracle.n_adjacent
        decoy.couplings = oracle.couplings.copy()
        decoy.couplings[oracle.n_adjacent:] *= -1.0
        decoy.mu = oracle.mu
        decoy.sigma = oracle.sigma

        if n_symbols ** seq_len > 2 ** 16:
            return oracle, decoy
        opt_o, score_o = enumerate_optimum(oracle)
        opt_d, _ = enumerate_optimum(decoy)
        distance = int((opt_o != opt_d).sum())
        decoy_opt_under_oracle = float(oracle.score_batch(opt_d[None, :])[0])
        if distance >= seq_len / 2 and decoy_opt_under_oracle < score_o:
            return oracle, decoy
        attempt += 1000003


class CachedScorer(Scorer):
    """Wraps any scorer with a thread-safe sequence -> report cache.

    Misses are forwarded downstream in a single deduplicated batch, so the
    wrapped scorer's query count equals the number of distinct sequences.
    """

    def __init__(self, inner: Scorer):
        super().__init__()
        self.inner = inner
        self.name = inner.name
        self.hits = 0
        self.misses = 0
        self._store: dict[bytes, ScoreReport] = {}
        self._lock = threading.Lock()

    def score_batch(self, seqs: np.ndarray) -> np.ndarray:
        seqs = np.atleast_2d(np.asarray(seqs, dtype=np.int64))
        keys = [row.tobytes() for row in seqs]
        with self._lock:
            missing: dict[bytes, int] = {}
            for idx, key in enumerate(keys):
                if key in self._store:
                    self.hits += 1
                elif key not in missing:
                    missing[key] = idx
                    self.misses += 1
                else:
                    self.hits += 1
            if missing:
                rows = seqs[sorted(missing.values())]
                fresh = self.inner.score_batch(rows)
                for key, score in zip(sorted(missing, key=missing.get), fresh):
                    self._store[key] = ScoreReport(score=float(score))
            self.queries += seqs.shape[0]
            return np.array([self._store[k].score for k in keys], dtype=np.float64)

    def report(self, seq: Sequence) -> ScoreReport:
        key = seq.to_array().tobytes()
        with self._lock:
            cached = self._store.get(key)
            if cached is not None and cached.confidence is not None:
                self.hits += 1
                self.queries += 1
                return cached
            fresh = self.inner.report(seq)
            if cached is None:
                self.misses += 1
            else:
                # score was cached; only the confidence channel was upgraded
                self.hits += 1
                fresh = ScoreReport(score=cached.score, confidence=fresh.confidence)
            self._store[key] = fresh
            self.queries += 1
            return fresh


def cached(scorer: Scorer) -> CachedScorer:
    return CachedScorer(scorer)


def make_synthetic_scorer(seq_len: int, n_symbols: int, seed: int) -> PottsScorer:
    return PottsScorer(PottsLandscape(seq_len, n_symbols, seed))


class ConstantScorer(Scorer):
    """Test double returning a fixed score for every sequence."""

    name = "constant"

    def __init__(self, value: float = 0.5):
        super().__init__()
        self.value = value

    def _score_batch(self, seqs: np.ndarray) -> np.ndarray:
        return np.full(seqs.shape[0], self.value, dtype=np.float64)
