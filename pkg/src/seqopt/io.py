"""File ingestion and emission: FASTA records, PDB alpha-carbon traces,
CSV tables with exact float round-tripping, and run manifests.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .metrics import StructureTrace


class FormatError(ValueError):
    pass


@dataclass(frozen=True)
class FastaRecord:
    id: str
    sequence: str


def _as_text_lines(source) -> Iterable[str]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            yield from fh
    else:
        yield from source


def read_fasta(source, alphabet_symbols: str | None = None, strict: bool = True,
               substitute: str | None = None) -> list[FastaRecord]:
    """Parse '>'-header FASTA; multi-line bodies are concatenated.

    strict mode rejects residues outside ``alphabet_symbols``; lenient mode
    replaces them with ``substitute`` or drops the record with a warning.
    """
    records: list[FastaRecord] = []
    header: str | None = None
    chunks: list[str] = []

    def flush():
        if header is None:
            return
        seq = "".join(chunks)
        if not seq:
            raise FormatError(f"record {header!r} has an empty sequence")
        records.append(_validate_record(header, seq, alphabet_symbols, strict, substitute))

    for line in _as_text_lines(source):
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            flush()
            header = line[1:].split()[0] if line[1:].strip() else ""
            if not header:
                raise FormatError("record with empty header id")
            chunks = []
        else:
            if header is None:
                raise FormatError("sequence data before any '>' header")
            chunks.append(line)
    flush()
    return [r for r in records if r is not None]


def _validate_record(header, seq, symbols, strict, substitute):
    if symbols is None:
        return FastaRecord(header, seq)
    bad = [c for c in seq if c not in symbols]
    if not bad:
        return FastaRecord(header, seq)
    if strict:
        raise FormatError(f"record {header!r} contains invalid residue {bad[0]!r}")
    if substitute is not None:
        table = str.maketrans({c: substitute for c in set(bad)})
        warnings.warn(f"record {header!r}: substituted {len(bad)} unknown residues", stacklevel=3)
        return FastaRecord(header, seq.translate(table))
    warnings.warn(f"record {header!r} dropped: unknown residues {sorted(set(bad))}", stacklevel=3)
    return None


def write_fasta(records: list[FastaRecord], target, width: int = 60) -> None:
    """Deterministic FASTA writer; read_fasta(write_fasta(r)) == r."""
    def emit(fh: IO[str]):
        for rec in records:
            fh.write(f">{rec.id}\n")
            for start in range(0, len(rec.sequence), width):
                fh.write(rec.sequence[start:start + width] + "\n")

    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            emit(fh)
    else:
        emit(target)


@dataclass(frozen=True)
class PdbCaTrace:
    chain: str
    residue_ids: tuple[int, ...]
    trace: StructureTrace


def read_pdb_ca(source, chain: str | None = None) -> PdbCaTrace:
    """Extract the alpha-carbon trace from fixed-column PDB ATOM records.

    Only the first model is read; altLoc other than blank/'A' is skipped.
    Residue numbers must be strictly increasing within the chain.
    """
    residue_ids: list[int] = []
    coords: list[tuple[float, float, float]] = []
    found_chain: str | None = None
    for raw in _as_text_lines(source):
        line = raw.rstrip("\n")
        if line.startswith("ENDMDL"):
            break
        if not line.startswith("ATOM"):
            continue
        if len(line) < 54:
            raise FormatError(f"truncated ATOM record: {line!r}")
        if line[12:16].strip() != "CA":
            continue
        if line[16] not in (" ", "A"):
            continue
        chain_id = line[21]
        if chain is not None and chain_id != chain:
            continue
        if found_chain is None:
            found_chain = chain_id
        elif chain is None and chain_id != found_chain:
            continue  # stick to the first chain encountered
        try:
            res_id = int(line[22:26])
            xyz = (float(line[30:38]), float(line[38:46]), float(line[46:54]))
        except ValueError as exc:
            raise FormatError(f"malformed numeric field in: {line!r}") from exc
        if residue_ids and res_id <= residue_ids[-1]:
            raise FormatError(f"residue index {res_id} not increasing after {residue_ids[-1]}")
        residue_ids.append(res_id)
        coords.append(xyz)
    if not coords:
        raise FormatError("no CA atoms found")
    return PdbCaTrace(chain=found_chain, residue_ids=tuple(residue_ids),
                      trace=StructureTrace(np.array(coords, dtype=np.float64)))


def format_cell(value) -> str:
    """CSV cell formatting: floats with 17 significant digits (round-trip exact)."""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(rows: list[dict], schema: list[str], target) -> None:
    """Write rows under a fixed header; missing cells are left empty."""
    def emit(fh: IO[str]):
        fh.write(",".join(schema) + "\n")
        for row in rows:
            fh.write(",".join(format_cell(row[c]) if c in row and row[c] is not None else ""
                              for c in schema) + "\n")

    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            emit(fh)
    else:
        emit(target)


def write_run_manifest(config: dict, seed: int, target) -> None:
    """JSON manifest holding every resolved config value plus the seed."""
    doc = {"seed": seed, "config": config}

    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        json.dump(doc, target, indent=2, sort_keys=True)
        target.write("\n")
