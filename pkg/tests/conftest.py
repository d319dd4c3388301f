import numpy as np

from seqopt.oracle import Scorer


class BanditScorer(Scorer):
    """L_s=1, L_a=2 landscape: action 1 scores 0.8, action 0 scores 0.2."""

    name = "bandit"

    def _score_batch(self, seqs):
        return np.where(seqs[:, 0] == 1, 0.8, 0.2)


def atom_line(serial, name, res, chain, resseq, x, y, z):
    """Fixed-column PDB ATOM record."""
    return (f"ATOM  {serial:>5} {name:<4} {res:<3} {chain}{resseq:>4}    "
            f"{x:8.3f}{y:8.3f}{z:8.3f}\n")


def write_ca_trace(path, coords, chain="A"):
    with open(path, "w") as fh:
        for i, (x, y, z) in enumerate(coords, start=1):
            fh.write(atom_line(i, " CA", "ALA", chain, i, x, y, z))
