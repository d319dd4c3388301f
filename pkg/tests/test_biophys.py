import numpy as np
import pytest

from seqopt.biophys import (AA_MASS, DIWV, KD_HYDROPATHY, BiophysReport,
                            PkaTable, UnknownResidue, biophys_report, dcs,
                            gravy, instability_index, isoelectric_point,
                            molecular_weight, net_charge)

AA = "ACDEFGHIKLMNPQRSTVWY"


# independent reference implementations over the same bundled tables
def ref_weight(seq):
    total = 0.0
    for c in seq:
        total += AA_MASS[c]
    return total - 18.02 * (len(seq) - 1)


def ref_gravy(seq):
    return float(np.mean([KD_HYDROPATHY[c] for c in seq]))


def ref_instability(seq):
    acc = 0.0
    for i in range(len(seq) - 1):
        acc += DIWV[seq[i]][seq[i + 1]]
    return acc * 10.0 / len(seq)


def ref_pi(seq, table):
    """Root via dense pH grid scan instead of bisection."""
    coarse = np.linspace(0.0, 14.0, 141)
    charges = np.array([net_charge(seq, ph, table) for ph in coarse])
    lo_idx = max(int(np.searchsorted(-charges, 0.0)) - 1, 0)
    fine = np.linspace(coarse[lo_idx], coarse[lo_idx] + 0.1, 2001)
    vals = np.array([net_charge(seq, ph, table) for ph in fine])
    return float(fine[np.argmin(np.abs(vals))])


class TestMolecularWeight:
    def test_free_glycine(self):
        assert molecular_weight("G") == pytest.approx(75.07)

    def test_diglycine(self):
        assert molecular_weight("GG") == pytest.approx(132.12)

    def test_appending_always_increases(self):
        seq = "GAV"
        for extra in AA:
            assert molecular_weight(seq + extra) > molecular_weight(seq)

    def test_concatenation_additivity(self):
        x, y = "ACDEF", "GHIKL"
        assert molecular_weight(x + y) == pytest.approx(
            molecular_weight(x) + molecular_weight(y) - 18.02)

    def test_unknown_residue(self):
        with pytest.raises(UnknownResidue):
            molecular_weight("AXB")


class TestGravy:
    def test_isoleucine(self):
        assert gravy("I") == pytest.approx(4.5)

    def test_arginine(self):
        assert gravy("R") == pytest.approx(-4.5)

    def test_mean_of_pair(self):
        assert gravy("IR") == pytest.approx(0.0)


class TestInstability:
    def test_single_term_formula(self):
        # find a dipeptide with DIWV exactly 1.0
        assert DIWV["A"]["A"] == 1.0
        assert instability_index("AA") == pytest.approx(10.0 * 1.0 / 2)

    def test_homopolymer_closed_form(self):
        for n in (4, 10, 25):
            seq = "A" * n
            assert instability_index(seq) == pytest.approx(
                10.0 * (n - 1) * DIWV["A"]["A"] / n)

    def test_matches_independent_reference(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            seq = "".join(rng.choice(list(AA), size=30))
            assert instability_index(seq) == pytest.approx(ref_instability(seq),
                                                           abs=1e-6)

    def test_too_short(self):
        with pytest.raises(ValueError):
            instability_index("A")


class TestIsoelectricPoint:
    def test_two_group_balance(self):
        # no ionizable side chains: root of the classic two-group equation
        table = PkaTable(n_terminus=9.6, c_terminus=2.34, basic_side={},
                         acidic_side={})
        assert isoelectric_point("GG", table) == pytest.approx(5.97, abs=0.01)

    def test_poly_lysine_is_basic(self):
        assert isoelectric_point("K" * 10) > 9.0

    def test_poly_aspartate_is_acidic(self):
        assert isoelectric_point("D" * 10) < 4.0

    def test_charge_is_zero_at_root(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            seq = "".join(rng.choice(list(AA), size=25))
            pi = isoelectric_point(seq)
            assert abs(net_charge(seq, pi)) < 1e-3

    def test_charge_strictly_decreasing(self):
        seq = "ACDKRHEY"
        phs = np.linspace(0, 14, 200)
        charges = [net_charge(seq, ph) for ph in phs]
        assert (np.diff(charges) < 0).all()

    def test_matches_grid_scan_reference(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            seq = "".join(rng.choice(list(AA), size=20))
            assert isoelectric_point(seq) == pytest.approx(
                ref_pi(seq, None), abs=1e-2)


class TestPanelCrossCheck:
    def test_fifty_random_length_50_sequences(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            seq = "".join(rng.choice(list(AA), size=50))
            report = biophys_report(seq)
            assert report.w_mol == pytest.approx(ref_weight(seq), abs=1e-3)
            assert report.gravy == pytest.approx(ref_gravy(seq), abs=1e-3)
            assert report.instability == pytest.approx(ref_instability(seq), abs=1e-3)
            assert report.pi == pytest.approx(ref_pi(seq, None), abs=1e-2)


def random_reports(rng, n, shift=0.0):
    return [BiophysReport(w_mol=5500 + 300 * rng.standard_normal() + shift,
                          instability=40 + 8 * rng.standard_normal() + shift,
                          pi=7 + rng.standard_normal() + shift,
                          gravy=rng.standard_normal())
            for _ in range(n)]


class TestDCS:
    def test_reference_against_itself_scores_half(self):
        rng = np.random.default_rng(4)
        ref = random_reports(rng, 200)
        assert dcs(ref, ref) == pytest.approx(0.5, abs=0.05)

    def test_far_outside_support_scores_near_zero(self):
        rng = np.random.default_rng(5)
        ref = random_reports(rng, 100)
        gen = random_reports(rng, 20, shift=1e5)
        assert dcs(gen, ref) == pytest.approx(1.0 / 101.0, abs=1e-9)

    def test_bounds(self):
        rng = np.random.default_rng(6)
        ref = random_reports(rng, 50)
        gen = random_reports(rng, 30)
        score = dcs(gen, ref)
        assert 1.0 / 51.0 <= score <= 1.0

    def test_affine_rescaling_invariance(self):
        rng = np.random.default_rng(7)
        ref = random_reports(rng, 60)
        gen = random_reports(rng, 25)

        def rescale(reports):
            return [BiophysReport(w_mol=3.0 * r.w_mol - 100.0,
                                  instability=r.instability,
                                  pi=0.5 * r.pi + 2.0,
                                  gravy=r.gravy) for r in reports]

        assert dcs(gen, ref) == pytest.approx(dcs(rescale(gen), rescale(ref)),
                                              abs=1e-9)

    def test_degenerate_feature_dropped_with_warning(self):
        rng = np.random.default_rng(8)
        ref = [BiophysReport(w_mol=5000.0, instability=40 + rng.standard_normal(),
                             pi=7 + rng.standard_normal(),
                             gravy=rng.standard_normal())
               for _ in range(40)]
        gen = ref[:10]
        with pytest.warns(UserWarning, match="w_mol"):
            score = dcs(gen, ref)
        assert 0.0 < score <= 1.0

    def test_small_reference_rejected(self):
        rng = np.random.default_rng(9)
        with pytest.raises(ValueError):
            dcs(random_reports(rng, 5), random_reports(rng, 10))


def test_default_pka_table_is_emboss():
    table = PkaTable.emboss_default()
    assert table.n_terminus == 8.6 and table.c_terminus == 3.6
    assert table.basic_side == {"H": 6.5, "K": 10.8, "R": 12.5}
    assert table.acidic_side == {"C": 8.5, "D": 3.9, "E": 4.1, "Y": 10.1}


def test_diwv_table_complete():
    assert set(DIWV) == set(AA)
    for row in DIWV.values():
        assert set(row) == set(AA)
