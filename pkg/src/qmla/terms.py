"""Hamiltonian terms, lattices, model families and parameterised models.

A model is a parameter vector dotted with an ordered list of term operators.
Each term operator is a sum of elementary labelled interactions sharing one
scalar parameter: family models sum a coupling over the whole lattice, while
genetic-search models use one label per term.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg

FAMILIES = ("ising", "heisenberg", "hubbard")

AXES = ("x", "y", "z")


class StructuralModelError(ValueError):
    """A lattice/family combination that cannot produce a valid model."""


@dataclass(frozen=True, order=True)
class TermLabel:
    """One elementary interaction: a Pauli coupling/field, a hopping, or an
    on-site density pair. Site pairs are stored sorted ascending."""

    kind: str  # pauli-coupling | pauli-field | hopping | onsite
    axis: str  # x|y|z for pauli kinds, up|down for hopping, "" for onsite
    sites: tuple[int, ...]

    def __post_init__(self):
        if self.kind in ("pauli-coupling", "hopping"):
            if len(self.sites) != 2 or self.sites[0] >= self.sites[1]:
                raise ValueError(f"site pair must be sorted ascending: {self.sites}")
        elif self.kind in ("pauli-field", "onsite"):
            if len(self.sites) != 1:
                raise ValueError(f"{self.kind} takes a single site: {self.sites}")
        else:
            raise ValueError(f"unknown term kind {self.kind!r}")
        if self.kind.startswith("pauli") and self.axis not in AXES:
            raise ValueError(f"bad axis {self.axis!r}")
        if self.kind == "hopping" and self.axis not in ("up", "down"):
            raise ValueError(f"bad spin {self.axis!r}")
        if self.kind == "onsite" and self.axis != "":
            raise ValueError("onsite terms carry no axis")

    @property
    def n_qubits(self) -> int:
        # Fermionic labels live on 2 qubits per site (spin-up mode before
        # spin-down, site-major).
        if self.kind in ("hopping", "onsite"):
            return 2 * max(self.sites)
        return max(self.sites)

    def to_string(self) -> str:
        sites = ",".join(str(s) for s in self.sites)
        if self.kind in ("pauli-coupling", "pauli-field"):
            return f"pauli:{self.axis}:({sites})"
        if self.kind == "hopping":
            return f"hop:{self.axis}:({sites})"
        return f"onsite:({sites})"

    @staticmethod
    def from_string(s: str) -> "TermLabel":
        parts = s.split(":")
        sites = tuple(int(x) for x in parts[-1].strip("()").split(","))
        if parts[0] == "pauli":
            kind = "pauli-coupling" if len(sites) == 2 else "pauli-field"
            return TermLabel(kind, parts[1], sites)
        if parts[0] == "hop":
            return TermLabel("hopping", parts[1], sites)
        if parts[0] == "onsite":
            return TermLabel("onsite", "", sites)
        raise ValueError(f"cannot parse term {s!r}")

    def matrix(self, n_qubits: int) -> np.ndarray:
        if n_qubits < self.n_qubits:
            raise ValueError(f"{self.to_string()} needs >= {self.n_qubits} qubits")
        if self.kind == "pauli-coupling":
            k, l = self.sites
            return linalg.pauli_string(n_qubits, {k: self.axis, l: self.axis})
        if self.kind == "pauli-field":
            (k,) = self.sites
            return linalg.pauli_string(n_qubits, {k: self.axis})
        if self.kind == "hopping":
            k, l = self.sites
            mk = _mode(k, self.axis)
            ml = _mode(l, self.axis)
            c_dag_l = linalg.jordan_wigner_ladder(ml, n_qubits, "create")
            c_k = linalg.jordan_wigner_ladder(mk, n_qubits, "annihilate")
            hop = c_dag_l @ c_k
            return hop + hop.conj().T
        # onsite
        (k,) = self.sites
        return linalg.number_operator(_mode(k, "up"), n_qubits) @ linalg.number_operator(
            _mode(k, "down"), n_qubits
        )


def _mode(site: int, spin: str) -> int:
    """JW mode index: site-major, spin-up before spin-down, 0-based."""
    return 2 * (site - 1) + (0 if spin == "up" else 1)


@dataclass(frozen=True)
class LatticeSpec:
    """Sites plus a set of unordered couplings between them."""

    n_sites: int
    couplings: frozenset[tuple[int, int]]
    label: str = ""

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be positive")
        for k, l in self.couplings:
            if not (1 <= k < l <= self.n_sites):
                raise ValueError(f"bad coupling ({k},{l}) for {self.n_sites} sites")

    @property
    def sorted_couplings(self) -> list[tuple[int, int]]:
        return sorted(self.couplings)


def chain(n_sites: int) -> LatticeSpec:
    pairs = frozenset((k, k + 1) for k in range(1, n_sites))
    return LatticeSpec(n_sites, pairs, label=f"chain-{n_sites}")


def ring(n_sites: int) -> LatticeSpec:
    if n_sites < 3:
        raise ValueError("ring needs at least 3 sites")
    pairs = set((k, k + 1) for k in range(1, n_sites))
    pairs.add((1, n_sites))
    return LatticeSpec(n_sites, frozenset(pairs), label=f"ring-{n_sites}")


def star(n_sites: int) -> LatticeSpec:
    pairs = frozenset((1, k) for k in range(2, n_sites + 1))
    return LatticeSpec(n_sites, pairs, label=f"star-{n_sites}")


def fully_connected(n_sites: int) -> LatticeSpec:
    pairs = frozenset(
        (k, l) for k in range(1, n_sites + 1) for l in range(k + 1, n_sites + 1)
    )
    return LatticeSpec(n_sites, pairs, label=f"full-{n_sites}")


_NAMED_LATTICES = {"chain": chain, "ring": ring, "star": star, "full": fully_connected}


def named_lattice(name: str) -> LatticeSpec:
    """Parse shorthand like 'chain-3' or 'ring-4'."""
    try:
        kind, n = name.rsplit("-", 1)
        return _NAMED_LATTICES[kind](int(n))
    except (KeyError, ValueError) as exc:
        raise ValueError(f"unknown lattice {name!r}") from exc


@dataclass(frozen=True)
class TermOperator:
    """A named sum of elementary labels sharing one scalar parameter."""

    name: str
    labels: tuple[TermLabel, ...]

    @property
    def n_qubits(self) -> int:
        return max(lbl.n_qubits for lbl in self.labels)

    def matrix(self, n_qubits: int) -> np.ndarray:
        total = np.zeros((2**n_qubits, 2**n_qubits), dtype=complex)
        for lbl in self.labels:
            total += lbl.matrix(n_qubits)
        return total


def single_term(label: TermLabel) -> TermOperator:
    return TermOperator(label.to_string(), (label,))


def build_family_terms(family: str, lattice: LatticeSpec) -> list[TermOperator]:
    """Ordered term operators for one model family on a lattice.

    Ising: summed z-z couplings plus a transverse x field (2 terms).
    Heisenberg: summed x-x, y-y, z-z couplings (3 terms).
    Hubbard: spin-up hopping, spin-down hopping, on-site interaction
    (3 terms), on 2 qubits per site through the Jordan-Wigner encoding.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    pairs = lattice.sorted_couplings
    sites = range(1, lattice.n_sites + 1)
    if family == "heisenberg" and not pairs:
        raise StructuralModelError("heisenberg model needs at least one coupling")
    if family == "ising":
        return [
            TermOperator(
                "zz-couplings",
                tuple(TermLabel("pauli-coupling", "z", p) for p in pairs),
            ),
            TermOperator(
                "x-field", tuple(TermLabel("pauli-field", "x", (k,)) for k in sites)
            ),
        ]
    if family == "heisenberg":
        return [
            TermOperator(
                f"{a}{a}-couplings",
                tuple(TermLabel("pauli-coupling", a, p) for p in pairs),
            )
            for a in AXES
        ]
    return [
        TermOperator(
            "up-hopping", tuple(TermLabel("hopping", "up", p) for p in pairs)
        ),
        TermOperator(
            "down-hopping", tuple(TermLabel("hopping", "down", p) for p in pairs)
        ),
        TermOperator(
            "onsite-interaction", tuple(TermLabel("onsite", "", (k,)) for k in sites)
        ),
    ]


@dataclass
class Model:
    """An ordered list of term operators with one real parameter each."""

    terms: tuple[TermOperator, ...]
    n_qubits: int
    parameters: np.ndarray | None = None
    name: str = ""
    family: str | None = None

    def __post_init__(self):
        names = [t.name for t in self.terms]
        if len(set(names)) != len(names):
            raise ValueError("duplicate term operators in model")
        if self.parameters is not None:
            self.parameters = np.asarray(self.parameters, dtype=float)
            if self.parameters.shape != (len(self.terms),):
                raise ValueError("parameter count must match term count")
        if any(t.n_qubits > self.n_qubits for t in self.terms):
            raise ValueError("model n_qubits too small for its terms")

    @property
    def k(self) -> int:
        """Cardinality: number of parameterised terms."""
        return len(self.terms)

    @property
    def label_set(self) -> frozenset[TermLabel]:
        return frozenset(lbl for t in self.terms for lbl in t.labels)

    def term_matrices(self, n_qubits: int | None = None) -> np.ndarray:
        nq = self.n_qubits if n_qubits is None else n_qubits
        if self.k == 0:
            return np.zeros((0, 2**nq, 2**nq), dtype=complex)
        return np.stack([t.matrix(nq) for t in self.terms])

    def hamiltonian(
        self, parameters: np.ndarray | None = None, n_qubits: int | None = None
    ) -> np.ndarray:
        params = self.parameters if parameters is None else np.asarray(parameters)
        if params is None:
            raise ValueError("model has no parameters assigned")
        nq = self.n_qubits if n_qubits is None else n_qubits
        mats = self.term_matrices(nq)
        if self.k == 0:
            return np.zeros((2**nq, 2**nq), dtype=complex)
        return np.tensordot(params, mats, axes=1)

    def with_parameters(self, parameters) -> "Model":
        return Model(
            self.terms, self.n_qubits, np.asarray(parameters, float), self.name, self.family
        )


def lattice_to_model(family: str, lattice: LatticeSpec) -> Model:
    terms = build_family_terms(family, lattice)
    n_qubits = 2 * lattice.n_sites if family == "hubbard" else lattice.n_sites
    return Model(
        tuple(terms),
        n_qubits,
        name=f"{family}:{lattice.label or lattice.n_sites}",
        family=family,
    )
