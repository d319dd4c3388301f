"""Biophysical panel computed from raw residue strings: molecular weight,
GRAVY, instability index, isoelectric point, and the distributional
conformity score against a reference set.

Residue tables ship as CSV data files (see ``seqopt/data``); pass a custom
:class:`PkaTable` to override the EMBOSS-style ionization defaults.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.stats import gaussian_kde

WATER_MASS = 18.02


def _data_rows(name: str) -> list[list[str]]:
    text = resources.files("seqopt.data").joinpath(name).read_text(encoding="utf-8")
    rows = []
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        rows.append(next(csv.reader([line])))
    return rows


def _load_residue_properties() -> tuple[dict[str, float], dict[str, float]]:
    rows = _data_rows("residue_properties.csv")
    header, body = rows[0], rows[1:]
    assert header[:3] == ["residue", "avg_mass", "kd_hydropathy"]
    masses = {r[0]: float(r[1]) for r in body}
    kd = {r[0]: float(r[2]) for r in body}
    return masses, kd


def _load_diwv() -> dict[str, dict[str, float]]:
    rows = _data_rows("diwv.csv")
    cols = rows[0][1:]
    return {row[0]: dict(zip(cols, map(float, row[1:]))) for row in rows[1:]}


AA_MASS, KD_HYDROPATHY = _load_residue_properties()
DIWV = _load_diwv()


class UnknownResidue(KeyError):
    pass


def _check(seq: str) -> str:
    for c in seq:
        if c not in AA_MASS:
            raise UnknownResidue(c)
    return seq


def molecular_weight(seq: str) -> float:
    """Peptide average mass in Da: free-residue masses minus one water per bond."""
    _check(seq)
    if not seq:
        raise ValueError("empty sequence")
    return sum(AA_MASS[c] for c in seq) - (len(seq) - 1) * WATER_MASS


def gravy(seq: str) -> float:
    """Grand average of hydropathy (mean Kyte-Doolittle value)."""
    _check(seq)
    if not seq:
        raise ValueError("empty sequence")
    return sum(KD_HYDROPATHY[c] for c in seq) / len(seq)


def instability_index(seq: str) -> float:
    """Guruprasad instability index: (10/L) * sum of dipeptide weights."""
    _check(seq)
    if len(seq) < 2:
        raise ValueError("instability index needs length >= 2")
    total = sum(DIWV[a][b] for a, b in zip(seq, seq[1:]))
    return 10.0 * total / len(seq)


@dataclass(frozen=True)
class PkaTable:
    """Ionizable groups: termini plus side chains. ``basic`` groups carry +1
    when protonated, ``acidic`` groups -1 when deprotonated."""

    n_terminus: float
    c_terminus: float
    basic_side: dict[str, float]
    acidic_side: dict[str, float]

    @classmethod
    def emboss_default(cls) -> "PkaTable":
        rows = _data_rows("pka_emboss.csv")[1:]
        values = {r[0]: (float(r[1]), r[2]) for r in rows}
        basic = {g: p for g, (p, k) in values.items() if k == "basic" and len(g) == 1}
        acidic = {g: p for g, (p, k) in values.items() if k == "acidic" and len(g) == 1}
        return cls(n_terminus=values["n_terminus"][0], c_terminus=values["c_terminus"][0],
                   basic_side=basic, acidic_side=acidic)


_DEFAULT_PKA = PkaTable.emboss_default()


def net_charge(seq: str, ph: float, table: PkaTable | None = None) -> float:
    """Henderson-Hasselbalch net charge at the given pH."""
    table = table or _DEFAULT_PKA
    _check(seq)

    def positive(pka: float) -> float:
        return 1.0 / (1.0 + 10.0 ** (ph - pka))

    def negative(pka: float) -> float:
        return 1.0 / (1.0 + 10.0 ** (pka - ph))

    charge = positive(table.n_terminus) - negative(table.c_terminus)
    for c in seq:
        if c in table.basic_side:
            charge += positive(table.basic_side[c])
        elif c in table.acidic_side:
            charge -= negative(table.acidic_side[c])
    return charge


def isoelectric_point(seq: str, table: PkaTable | None = None, tol: float = 1e-4) -> float:
    """pH where the modeled net charge crosses zero, by bisection on [0, 14].

    The charge is strictly decreasing in pH, so the root is unique.
    """
    lo, hi = 0.0, 14.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if net_charge(seq, mid, table) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BiophysReport:
    w_mol: float
    instability: float
    pi: float
    gravy: float

    def as_array(self) -> np.ndarray:
        return np.array([self.w_mol, self.instability, self.pi, self.gravy])


FEATURE_NAMES = ("w_mol", "instability", "pi", "gravy")


def biophys_report(seq: str, pka: PkaTable | None = None) -> BiophysReport:
    return BiophysReport(
        w_mol=molecular_weight(seq),
        instability=instability_index(seq),
        pi=isoelectric_point(seq, pka),
        gravy=gravy(seq),
    )


def dcs(generated: list[BiophysReport], reference: list[BiophysReport]) -> float:
    """Distributional conformity score in [1/(N+1), 1].

    Features are standardized by the reference set; nonconformity is negative
    log density under a Gaussian KDE (Scott's rule) fit on the reference, and
    each generated sample receives the conformal p-value
    (1 + #{reference with nonconformity >= sample's}) / (N_ref + 1).
    In-distribution sets therefore score about 0.5.
    """
    if len(reference) < 20:
        raise ValueError("reference set must hold at least 20 reports")
    if not generated:
        raise ValueError("no generated reports")
    ref = np.stack([r.as_array() for r in reference])
    gen = np.stack([g.as_array() for g in generated])

    mean = ref.mean(axis=0)
    std = ref.std(axis=0)
    keep = std > 0
    if not keep.all():
        dropped = [n for n, k in zip(FEATURE_NAMES, keep) if not k]
        warnings.warn(f"dropping zero-variance features: {dropped}", stacklevel=2)
    if not keep.any():
        raise ValueError("all reference features are degenerate")
    ref_z = (ref[:, keep] - mean[keep]) / std[keep]
    gen_z = (gen[:, keep] - mean[keep]) / std[keep]

    kde = gaussian_kde(ref_z.T, bw_method="scott")
    ref_nc = -kde.logpdf(ref_z.T)
    gen_nc = -kde.logpdf(gen_z.T)
    n_ref = ref_nc.shape[0]
    p_values = (1.0 + (ref_nc[None, :] >= gen_nc[:, None]).sum(axis=1)) / (n_ref + 1.0)
    return float(p_values.mean())
