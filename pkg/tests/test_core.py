import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from seqopt.core import (AMINO_ACIDS, Alphabet, ContractViolation,
                         MutationAction, Sequence, apply_mutation,
                         decode_action, encode_action, encode_one_hot,
                         one_hot_batch)

ABC3 = Alphabet(("A", "B", "C"))
AA = Alphabet()


def test_default_alphabet_is_canonical_20():
    assert "".join(AA.symbols) == AMINO_ACIDS
    assert AA.size == 20
    assert AA.index("A") == 0 and AA.index("Y") == 19


def test_alphabet_rejects_duplicates_and_tiny():
    with pytest.raises(ContractViolation):
        Alphabet(("A", "A"))
    with pytest.raises(ContractViolation):
        Alphabet(("A",))


def test_one_hot_examples():
    seq = Sequence((0, 1))
    np.testing.assert_array_equal(encode_one_hot(seq, ABC3),
                                  [[1, 0, 0], [0, 1, 0]])
    seq = Sequence((2, 2))
    np.testing.assert_array_equal(encode_one_hot(seq, ABC3),
                                  [[0, 0, 1], [0, 0, 1]])


@given(st.lists(st.integers(0, 19), min_size=1, max_size=40))
def test_one_hot_rows_sum_to_one(residues):
    m = encode_one_hot(Sequence(tuple(residues)), AA)
    np.testing.assert_array_equal(m.sum(axis=1), np.ones(len(residues)))


def test_apply_mutation_substitution():
    seq = Sequence.from_string("ACD", AA)
    out = apply_mutation(seq, MutationAction(1, AA.index("G")), AA)
    assert out.to_string(AA) == "AGD"


def test_apply_mutation_self_mutation_is_identity():
    seq = Sequence.from_string("ACD", AA)
    out = apply_mutation(seq, MutationAction(0, AA.index("A")), AA)
    assert out == seq


def test_apply_mutation_range_errors():
    seq = Sequence.from_string("ACD", AA)
    with pytest.raises(ContractViolation):
        apply_mutation(seq, MutationAction(3, 0), AA)
    with pytest.raises(ContractViolation):
        apply_mutation(seq, MutationAction(0, 20), AA)


@given(st.integers(0, 19), st.integers(0, 49),
       st.lists(st.integers(0, 19), min_size=50, max_size=50))
def test_mutation_moves_hamming_by_at_most_one(res, pos, residues):
    seq = Sequence(tuple(residues))
    out = apply_mutation(seq, MutationAction(pos, res), AA)
    assert sum(a != b for a, b in zip(seq.residues, out.residues)) in (0, 1)


def test_flat_decode_boundary():
    a = decode_action(999, seq_len=50, n_symbols=20)
    assert (a.position, a.residue) == (49, 19)


def test_flat_decode_examples():
    assert decode_action(0, 3, 4) == MutationAction(0, 0)
    a = decode_action(21, 2, 20)
    assert (a.position, a.residue) == (1, 1)


def test_roundtrip_exhaustive_small():
    # every flat index for L_s=3, L_a=4 (12 cases)
    for flat in range(12):
        action = decode_action(flat, 3, 4)
        assert encode_action(action, 4) == flat


@given(st.integers(2, 30), st.integers(2, 25), st.data())
def test_roundtrip_property(seq_len, n_symbols, data):
    flat = data.draw(st.integers(0, seq_len * n_symbols - 1))
    assert encode_action(decode_action(flat, seq_len, n_symbols), n_symbols) == flat


def test_decode_range_violation():
    with pytest.raises(ContractViolation):
        decode_action(12, 3, 4)
    with pytest.raises(ContractViolation):
        decode_action(-1, 3, 4)


def test_one_hot_batch_matches_single():
    rng = np.random.default_rng(0)
    seqs = rng.integers(0, 20, size=(7, 11))
    batch = one_hot_batch(seqs, 20)
    for i, row in enumerate(seqs):
        single = encode_one_hot(Sequence(tuple(int(r) for r in row)), AA)
        np.testing.assert_array_equal(batch[i].reshape(11, 20), single)


def test_sequence_string_roundtrip():
    s = "ACDEFGHIKLMNPQRSTVWY"
    assert Sequence.from_string(s, AA).to_string(AA) == s
