import io as stdio
import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from seqopt.io import (FastaRecord, FormatError, read_fasta, read_pdb_ca,
                       write_csv, write_fasta, write_run_manifest)

from conftest import atom_line

FIXTURES = Path(__file__).parent / "fixtures"
AA = "ACDEFGHIKLMNPQRSTVWY"


class TestFasta:
    def test_single_record(self):
        assert read_fasta(stdio.StringIO(">a\nACD\n")) == [FastaRecord("a", "ACD")]

    def test_multiline_body_concatenated(self):
        assert read_fasta(stdio.StringIO(">a\nAC\nD\n")) == [FastaRecord("a", "ACD")]

    def test_header_keeps_first_token(self):
        recs = read_fasta(stdio.StringIO(">seq1 some description\nAC\n"))
        assert recs[0].id == "seq1"

    def test_data_before_header_rejected(self):
        with pytest.raises(FormatError):
            read_fasta(stdio.StringIO("ACD\n"))

    def test_empty_sequence_rejected(self):
        with pytest.raises(FormatError):
            read_fasta(stdio.StringIO(">a\n>b\nAC\n"))

    def test_strict_mode_rejects_noncanonical(self):
        with pytest.raises(FormatError):
            read_fasta(stdio.StringIO(">a\nACX\n"), alphabet_symbols=AA, strict=True)

    def test_lenient_substitution(self):
        with pytest.warns(UserWarning):
            recs = read_fasta(stdio.StringIO(">a\nACX\n"), alphabet_symbols=AA,
                              strict=False, substitute="A")
        assert recs == [FastaRecord("a", "ACA")]

    def test_lenient_drop(self):
        with pytest.warns(UserWarning):
            recs = read_fasta(stdio.StringIO(">a\nACX\n>b\nAC\n"),
                              alphabet_symbols=AA, strict=False)
        assert recs == [FastaRecord("b", "AC")]

    @given(st.lists(
        st.tuples(st.text(alphabet="abcdef0123456789_", min_size=1, max_size=12),
                  st.text(alphabet=AA, min_size=1, max_size=150)),
        min_size=1, max_size=20))
    def test_roundtrip_identity(self, pairs):
        records = [FastaRecord(f"r{i}_{name}", seq) for i, (name, seq) in enumerate(pairs)]
        buf = stdio.StringIO()
        write_fasta(records, buf)
        assert read_fasta(stdio.StringIO(buf.getvalue())) == records

    def test_writer_deterministic(self, tmp_path):
        records = [FastaRecord("a", "ACD" * 30), FastaRecord("b", "GGG")]
        p1, p2 = tmp_path / "a.fasta", tmp_path / "b.fasta"
        write_fasta(records, p1)
        write_fasta(records, p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestPdb:
    def test_fixture_trace(self):
        trace = read_pdb_ca(FIXTURES / "mini.pdb")
        assert trace.chain == "A"
        assert trace.residue_ids == (1, 2, 3)
        np.testing.assert_allclose(
            trace.trace.coords,
            [[11.639, 6.071, -5.147], [10.201, 7.843, -2.851], [8.490, 9.432, -0.942]])

    def test_only_ca_atoms_kept(self):
        # fixture has N, C, CB atoms that must not appear
        trace = read_pdb_ca(FIXTURES / "mini.pdb")
        assert len(trace.trace) == 3

    def test_altloc_b_skipped(self):
        trace = read_pdb_ca(FIXTURES / "mini.pdb")
        assert not np.any(np.all(trace.trace.coords == 9.254, axis=1))

    def test_single_line_parse(self):
        line = ("ATOM      2  CA  ALA A   1      11.639   6.071  -5.147"
                "  1.00  0.00           C\n")
        trace = read_pdb_ca(stdio.StringIO(line))
        np.testing.assert_allclose(trace.trace.coords, [[11.639, 6.071, -5.147]])

    def test_decreasing_residue_index_rejected(self):
        lines = (atom_line(1, " CA", "ALA", "A", 5, 1.0, 2.0, 3.0)
                 + atom_line(2, " CA", "GLY", "A", 4, 1.0, 2.0, 3.0))
        with pytest.raises(FormatError):
            read_pdb_ca(stdio.StringIO(lines))

    def test_malformed_coordinates_rejected(self):
        line = atom_line(1, " CA", "ALA", "A", 1, 1.0, 2.0, 3.0).replace(
            "   1.000", "  xx.xxx")
        with pytest.raises(FormatError):
            read_pdb_ca(stdio.StringIO(line))

    def test_empty_trace_rejected(self):
        with pytest.raises(FormatError):
            read_pdb_ca(stdio.StringIO("HEADER nothing\n"))

    def test_chain_filter(self):
        lines = (atom_line(1, " CA", "ALA", "A", 1, 1.0, 2.0, 3.0)
                 + atom_line(2, " CA", "GLY", "B", 1, 4.0, 5.0, 6.0))
        trace = read_pdb_ca(stdio.StringIO(lines), chain="B")
        np.testing.assert_allclose(trace.trace.coords, [[4.0, 5.0, 6.0]])

    def test_second_model_ignored(self):
        lines = (atom_line(1, " CA", "ALA", "A", 1, 1.0, 2.0, 3.0)
                 + "ENDMDL\n"
                 + atom_line(9, " CA", "GLY", "A", 9, 9.0, 9.0, 9.0))
        trace = read_pdb_ca(stdio.StringIO(lines))
        assert len(trace.trace) == 1


class TestCsv:
    def test_header_only_for_empty_rows(self):
        buf = stdio.StringIO()
        write_csv([], ["a", "b"], buf)
        assert buf.getvalue() == "a,b\n"

    def test_roundtrip_floats_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        values = list(rng.standard_normal(50)) + [1 / 3, 1e-17, 12345.678901234567]
        rows = [{"x": float(v)} for v in values]
        path = tmp_path / "vals.csv"
        write_csv(rows, ["x"], path)
        lines = path.read_text().splitlines()[1:]
        parsed = [float(line) for line in lines]
        assert parsed == [float(v) for v in values]

    def test_missing_cells_left_empty(self):
        buf = stdio.StringIO()
        write_csv([{"a": 1}, {"a": 2, "b": 0.5}], ["a", "b"], buf)
        lines = buf.getvalue().splitlines()
        assert lines[1] == "1,"
        assert lines[2] == "2,0.5"

    def test_deterministic_bytes(self, tmp_path):
        rows = [{"a": 0.1, "b": "x"}, {"a": 0.2, "b": "y"}]
        p1, p2 = tmp_path / "1.csv", tmp_path / "2.csv"
        write_csv(rows, ["a", "b"], p1)
        write_csv(rows, ["a", "b"], p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestManifest:
    def test_contains_config_and_seed(self, tmp_path):
        path = tmp_path / "manifest.json"
        write_run_manifest({"alpha": 1, "nested": {"b": [1, 2]}}, seed=42, target=path)
        doc = json.loads(path.read_text())
        assert doc["seed"] == 42
        assert doc["config"]["nested"]["b"] == [1, 2]
