"""Chromosome encoding and F1 classification metrics."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmla.genome import Chromosome, GeneMap, decode, encode, f1_metrics, xyz_gene_map
from qmla.terms import TermLabel
from qmla.utils import rng_for

bits_9 = st.text(alphabet="01", min_size=9, max_size=9)


def z_coupling(pair):
    return TermLabel("pauli-coupling", "z", pair)


class TestGeneMap:
    def test_xyz_three_sites_has_nine_genes(self):
        assert len(xyz_gene_map(3)) == 9

    def test_xyz_four_sites_has_eighteen_genes(self):
        assert len(xyz_gene_map(4)) == 18

    def test_canonical_order_pairs_then_axes(self):
        labels = xyz_gene_map(3).labels
        expected = [
            ("x", (1, 2)), ("y", (1, 2)), ("z", (1, 2)),
            ("x", (1, 3)), ("y", (1, 3)), ("z", (1, 3)),
            ("x", (2, 3)), ("y", (2, 3)), ("z", (2, 3)),
        ]
        assert [(l.axis, l.sites) for l in labels] == expected

    def test_duplicate_labels_rejected(self):
        lbl = z_coupling((1, 2))
        with pytest.raises(ValueError):
            GeneMap((lbl, lbl))


class TestChromosome:
    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            Chromosome("012")

    def test_cardinality(self):
        assert Chromosome("0110").cardinality == 2


class TestDecode:
    def test_all_zero_gives_empty_model(self):
        model = decode(Chromosome("0" * 9), xyz_gene_map(3))
        assert model.k == 0

    def test_all_one_gives_full_alphabet(self):
        gm = xyz_gene_map(4)
        model = decode(Chromosome("1" * 18), gm)
        assert model.k == 18
        assert model.label_set == frozenset(gm.labels)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            decode(Chromosome("01"), xyz_gene_map(3))

    def test_flagship_target_chromosome(self):
        # Terms y,z on (1,2); z on (1,3); y on (1,4); x,y on (2,3); x on
        # (2,4); x,z on (3,4) — 9 of the 18 four-site genes.
        gm = xyz_gene_map(4)
        truth = {
            ("y", (1, 2)), ("z", (1, 2)),
            ("z", (1, 3)),
            ("y", (1, 4)),
            ("x", (2, 3)), ("y", (2, 3)),
            ("x", (2, 4)),
            ("x", (3, 4)), ("z", (3, 4)),
        }
        labels = [
            TermLabel("pauli-coupling", axis, pair) for axis, pair in truth
        ]
        chrom = encode(labels, gm)
        assert chrom.bits == "011001010110100101"
        assert chrom.cardinality == 9
        decoded = decode(chrom, gm)
        assert decoded.label_set == frozenset(labels)

    @given(bits_9)
    @settings(max_examples=60, deadline=None)
    def test_encode_decode_round_trip(self, bits):
        gm = xyz_gene_map(3)
        model = decode(Chromosome(bits), gm)
        assert encode(model.label_set, gm).bits == bits


class TestF1Metrics:
    def test_identical_sets(self):
        s = {z_coupling((1, 2)), z_coupling((2, 3))}
        assert f1_metrics(s, s) == (1.0, 1.0, 1.0)

    def test_disjoint_example(self):
        # Two 5-site z-coupling models sharing no terms.
        truth = {z_coupling(p) for p in [(1, 2), (1, 3), (2, 3), (2, 5), (3, 5)]}
        cand = {z_coupling(p) for p in [(1, 5), (3, 4), (4, 5)]}
        precision, sensitivity, f1 = f1_metrics(cand, truth)
        assert (precision, sensitivity, f1) == (0.0, 0.0, 0.0)

    def test_partial_overlap_example(self):
        # TP=2, FP=3, FN=3 -> f1 = 0.4
        truth = {z_coupling(p) for p in [(1, 2), (1, 3), (2, 3), (2, 5), (3, 5)]}
        cand = {z_coupling(p) for p in [(1, 2), (1, 5), (2, 4), (2, 5), (4, 5)]}
        precision, sensitivity, f1 = f1_metrics(cand, truth)
        assert f1 == pytest.approx(0.4)
        assert precision == pytest.approx(2 / 5)
        assert sensitivity == pytest.approx(2 / 5)

    def test_empty_candidate_is_zero(self):
        truth = {z_coupling((1, 2))}
        assert f1_metrics(set(), truth) == (0.0, 0.0, 0.0)

    def test_both_empty_is_zero(self):
        assert f1_metrics(set(), set()) == (0.0, 0.0, 0.0)

    @given(bits_9, bits_9)
    @settings(max_examples=60, deadline=None)
    def test_precision_sensitivity_duality(self, a, b):
        gm = xyz_gene_map(3)
        sa = decode(Chromosome(a), gm).label_set
        sb = decode(Chromosome(b), gm).label_set
        pa, ra, _ = f1_metrics(sa, sb)
        pb, rb, _ = f1_metrics(sb, sa)
        assert pa == pytest.approx(rb)
        assert ra == pytest.approx(pb)

    def test_random_chromosome_mean_f1_near_half(self):
        # Uniform 18-bit chromosomes against the 9-term flagship target.
        gm = xyz_gene_map(4)
        truth = decode(Chromosome("011001010110100101"), gm).label_set
        rng = rng_for("f1-stats")
        draws = rng.integers(0, 2, size=(10_000, 18))
        scores = []
        for row in draws:
            bits = "".join("1" if b else "0" for b in row)
            cand = decode(Chromosome(bits), gm).label_set
            scores.append(f1_metrics(cand, truth)[2])
        assert 0.45 <= float(np.mean(scores)) <= 0.55
