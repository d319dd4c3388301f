"""Sequence and alphabet domain types shared by every other module.

Sequences are fixed-length tuples of alphabet indices. Actions are single-site
substitutions, flat-encoded row-major (position-major) into ``L_s * L_a``
choices so that policy networks can emit one flat logit vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"


class ContractViolation(ValueError):
    """An argument broke a documented precondition."""


@dataclass(frozen=True)
class Alphabet:
    """Ordered residue alphabet; index() is a bijection onto 0..size-1."""

    symbols: tuple[str, ...] = tuple(AMINO_ACIDS)
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.symbols) < 2:
            raise ContractViolation("alphabet needs at least 2 symbols")
        if len(set(self.symbols)) != len(self.symbols):
            raise ContractViolation("alphabet symbols must be distinct")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.symbols)})

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise ContractViolation(f"symbol {symbol!r} not in alphabet") from None

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._index


@dataclass(frozen=True)
class Sequence:
    """Fixed-length residue sequence as a tuple of alphabet indices."""

    residues: tuple[int, ...]

    def __post_init__(self):
        if len(self.residues) < 1:
            raise ContractViolation("sequence must be non-empty")
        if any(r < 0 for r in self.residues):
            raise ContractViolation("negative residue index")

    def __len__(self) -> int:
        return len(self.residues)

    @classmethod
    def from_string(cls, s: str, alphabet: Alphabet) -> "Sequence":
        return cls(tuple(alphabet.index(c) for c in s))

    def to_string(self, alphabet: Alphabet) -> str:
        return "".join(alphabet.symbols[r] for r in self.residues)

    def to_array(self) -> np.ndarray:
        return np.asarray(self.residues, dtype=np.int64)


@dataclass(frozen=True)
class MutationAction:
    """Substitute ``residue`` at ``position``; self-mutations are legal."""

    position: int
    residue: int

    def __post_init__(self):
        if self.position < 0 or self.residue < 0:
            raise ContractViolation("action indices must be non-negative")

    def flat(self, n_symbols: int) -> int:
        return self.position * n_symbols + self.residue


def encode_action(action: MutationAction, n_symbols: int) -> int:
    """Row-major flat index: flat = position * L_a + residue."""
    if action.residue >= n_symbols:
        raise ContractViolation(f"residue {action.residue} >= alphabet size {n_symbols}")
    return action.position * n_symbols + action.residue


def decode_action(flat: int, seq_len: int, n_symbols: int) -> MutationAction:
    """Inverse of :func:`encode_action`; validates 0 <= flat < L_s * L_a."""
    if not 0 <= flat < seq_len * n_symbols:
        raise ContractViolation(f"flat action {flat} out of range for {seq_len}x{n_symbols}")
    return MutationAction(position=flat // n_symbols, residue=flat % n_symbols)


def apply_mutation(seq: Sequence, action: MutationAction, alphabet: Alphabet) -> Sequence:
    """Return the sequence with ``action`` applied; differs in at most one site."""
    if action.position >= len(seq):
        raise ContractViolation(f"position {action.position} >= sequence length {len(seq)}")
    if action.residue >= alphabet.size:
        raise ContractViolation(f"residue {action.residue} >= alphabet size {alphabet.size}")
    residues = list(seq.residues)
    residues[action.position] = action.residue
    return Sequence(tuple(residues))


def encode_one_hot(seq: Sequence, alphabet: Alphabet) -> np.ndarray:
    """One-hot matrix, L_s rows x L_a columns; each row sums to exactly 1."""
    arr = seq.to_array()
    if arr.max() >= alphabet.size:
        raise ContractViolation("residue index outside alphabet")
    out = np.zeros((len(seq), alphabet.size), dtype=np.float64)
    out[np.arange(len(seq)), arr] = 1.0
    return out


def one_hot_batch(seqs: np.ndarray, n_symbols: int) -> np.ndarray:
    """Flattened one-hot encoding for a (B, L_s) int array -> (B, L_s * L_a)."""
    seqs = np.asarray(seqs, dtype=np.int64)
    b, ls = seqs.shape
    out = np.zeros((b, ls * n_symbols), dtype=np.float64)
    flat_cols = np.arange(ls) * n_symbols + seqs
    out[np.arange(b)[:, None], flat_cols] = 1.0
    return out
