"""Chromosome encoding over an ordered term alphabet, and set-overlap metrics."""

from __future__ import annotations

from dataclasses import dataclass

from .terms import AXES, Model, TermLabel, single_term


@dataclass(frozen=True)
class GeneMap:
    """Ordered term alphabet; bit i of a chromosome toggles labels[i].

    Canonical order: site pairs lexicographic, axes x < y < z within a pair.
    """

    labels: tuple[TermLabel, ...]

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("gene map labels must be unique")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def n_qubits(self) -> int:
        return max(lbl.n_qubits for lbl in self.labels)

    def index_of(self, label: TermLabel) -> int:
        return self.labels.index(label)


def xyz_gene_map(n_sites: int) -> GeneMap:
    """Fully connected pairwise x/y/z couplings: 3 * C(n,2) genes."""
    labels = [
        TermLabel("pauli-coupling", axis, (k, l))
        for k in range(1, n_sites + 1)
        for l in range(k + 1, n_sites + 1)
        for axis in AXES
    ]
    labels.sort(key=lambda lbl: (lbl.sites, AXES.index(lbl.axis)))
    return GeneMap(tuple(labels))


@dataclass(frozen=True)
class Chromosome:
    bits: str

    def __post_init__(self):
        if set(self.bits) - {"0", "1"}:
            raise ValueError(f"chromosome must be a 0/1 string: {self.bits!r}")

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def cardinality(self) -> int:
        return self.bits.count("1")


def decode(chromosome: Chromosome, gene_map: GeneMap) -> Model:
    """Model whose terms are the alphabet labels at set bits, in map order.
    Parameters are left unassigned for training."""
    if len(chromosome) != len(gene_map):
        raise ValueError(
            f"chromosome length {len(chromosome)} != gene map length {len(gene_map)}"
        )
    terms = tuple(
        single_term(lbl)
        for bit, lbl in zip(chromosome.bits, gene_map.labels)
        if bit == "1"
    )
    return Model(terms, gene_map.n_qubits, name=f"ga:{chromosome.bits}")


def encode(labels, gene_map: GeneMap) -> Chromosome:
    present = set(labels)
    unknown = present - set(gene_map.labels)
    if unknown:
        raise ValueError(f"labels outside alphabet: {sorted(unknown)}")
    return Chromosome("".join("1" if lbl in present else "0" for lbl in gene_map.labels))


def f1_metrics(candidate, truth) -> tuple[float, float, float]:
    """(precision, sensitivity, f1) for a candidate term set against the truth.

    Undefined fractions (empty candidate or truth) resolve to 0.
    """
    cand = set(candidate)
    true = set(truth)
    tp = len(cand & true)
    fp = len(cand - true)
    fn = len(true - cand)
    precision = tp / (tp + fp) if tp + fp else 0.0
    sensitivity = tp / (tp + fn) if tp + fn else 0.0
    f1 = tp / (tp + 0.5 * (fp + fn)) if tp + fp + fn else 0.0
    return precision, sensitivity, f1
