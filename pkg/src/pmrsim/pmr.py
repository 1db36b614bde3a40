"""Hamiltonians in permutation matrix representation (PMR).

A Hamiltonian over N qubits is stored as H = D0 + sum_i D_i P_i where every
D is diagonal in the computational basis and every P_i flips a fixed nonzero
subset of qubits (a tensor product of Pauli-X operators, encoded as a bit
mask).  Diagonals are sums of Pauli-Z products, encoded as (coefficient,
z_mask) pairs.

Conventions used throughout the package:

* basis states are integers z in [0, 2^N); bit j of z belongs to qubit j,
  bit 0 is the least significant bit;
* qubit j's Z eigenvalue at state z is (-1)^{bit_j(z)};
* in Pauli words such as ``ZIXZ`` the first character acts on qubit 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PauliString",
    "DiagonalOperator",
    "PermutationOperator",
    "PmrHamiltonian",
    "GammaBounds",
    "PhasedPermutationHamiltonian",
    "pauli_to_pmr",
    "pmr_to_pauli_strings",
    "diagonal_energy",
    "hopping_strength",
    "gamma_bounds",
    "dense_matrix",
    "alternative_representation",
    "hermiticity_defect",
    "parse_hamiltonian",
    "parse_hamiltonian_file",
    "format_hamiltonian",
    "HamiltonianParseError",
]

DENSE_THRESHOLD = 12
ENUMERATION_THRESHOLD = 22
MERGE_RTOL = 1e-14


class HamiltonianParseError(ValueError):
    """Raised for malformed Hamiltonian text; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _check_mask(mask: int, n_qubits: int, name: str) -> None:
    if mask < 0 or mask >> n_qubits:
        raise ValueError(f"{name} 0x{mask:x} does not fit in {n_qubits} qubits")


def parity_signs(mask: int, n_qubits: int) -> np.ndarray:
    """(-1)^{popcount(z & mask)} for every basis state z, as an int8 array."""
    z = np.arange(1 << n_qubits, dtype=np.uint64)
    odd = np.bitwise_count(z & np.uint64(mask)) & 1
    return 1 - 2 * odd.astype(np.int8)


@dataclass(frozen=True)
class PauliString:
    """A single Pauli product c * prod_j sigma_j with disjoint X/Y/Z masks."""

    coefficient: float
    z_mask: int
    x_mask: int
    y_mask: int
    n_qubits: int

    def __post_init__(self):
        if self.n_qubits <= 0:
            raise ValueError("n_qubits must be positive")
        for name in ("z_mask", "x_mask", "y_mask"):
            _check_mask(getattr(self, name), self.n_qubits, name)
        if (self.z_mask & self.x_mask) or (self.z_mask & self.y_mask) or (
            self.x_mask & self.y_mask
        ):
            raise ValueError("z/x/y masks must be pairwise disjoint")

    @classmethod
    def from_word(cls, coefficient: float, word: str) -> "PauliString":
        """Build from a word over {I,X,Y,Z}; character j acts on qubit j."""
        z = x = y = 0
        for j, ch in enumerate(word):
            if ch == "Z":
                z |= 1 << j
            elif ch == "X":
                x |= 1 << j
            elif ch == "Y":
                y |= 1 << j
            elif ch != "I":
                raise ValueError(f"invalid Pauli character {ch!r}")
        return cls(coefficient, z, x, y, len(word))

    def to_word(self) -> str:
        chars = []
        for j in range(self.n_qubits):
            bit = 1 << j
            if self.z_mask & bit:
                chars.append("Z")
            elif self.x_mask & bit:
                chars.append("X")
            elif self.y_mask & bit:
                chars.append("Y")
            else:
                chars.append("I")
        return "".join(chars)

    def dense(self) -> np.ndarray:
        """Dense matrix of the string (test oracle; small N only)."""
        if self.n_qubits > DENSE_THRESHOLD:
            raise ValueError("dense Pauli string limited to small N")
        dim = 1 << self.n_qubits
        flip = self.x_mask | self.y_mask
        cols = np.arange(dim)
        rows = cols ^ flip
        # sigma_y = -i * sigma_z * sigma_x, applied qubit-wise
        phase = (-1j) ** bin(self.y_mask).count("1")
        signs = parity_signs(self.z_mask | self.y_mask, self.n_qubits)
        mat = np.zeros((dim, dim), dtype=complex)
        mat[rows, cols] = self.coefficient * phase * signs[rows]
        return mat


@dataclass(frozen=True)
class DiagonalOperator:
    """Sum of Pauli-Z products: terms are (complex coefficient, z_mask) pairs.

    Duplicate masks are merged at construction; term order is canonical
    (ascending mask) so equal operators compare equal.
    """

    terms: tuple[tuple[complex, int], ...]
    n_qubits: int

    def __init__(self, terms, n_qubits: int):
        merged: dict[int, complex] = {}
        for coeff, mask in terms:
            _check_mask(mask, n_qubits, "z_mask")
            merged[mask] = merged.get(mask, 0j) + complex(coeff)
        canon = tuple(
            (merged[m], m) for m in sorted(merged) if merged[m] != 0
        )
        object.__setattr__(self, "terms", canon)
        object.__setattr__(self, "n_qubits", n_qubits)

    @classmethod
    def zero(cls, n_qubits: int) -> "DiagonalOperator":
        return cls((), n_qubits)

    def value(self, z: int) -> complex:
        """Diagonal element <z|D|z>."""
        total = 0j
        for coeff, mask in self.terms:
            total += coeff if bin(z & mask).count("1") % 2 == 0 else -coeff
        return total

    def values(self) -> np.ndarray:
        """Diagonal elements over all 2^N basis states."""
        if self.n_qubits > ENUMERATION_THRESHOLD:
            raise ValueError("full enumeration limited to small N")
        out = np.zeros(1 << self.n_qubits, dtype=complex)
        for coeff, mask in self.terms:
            out += coeff * parity_signs(mask, self.n_qubits)
        return out

    def sum_abs(self) -> float:
        return float(sum(abs(c) for c, _ in self.terms))

    def is_real(self, tol: float = 0.0) -> bool:
        return all(abs(c.imag) <= tol for c, _ in self.terms)

    def pruned(self, tol: float) -> "DiagonalOperator":
        """Drop coefficients with magnitude below ``tol``."""
        return DiagonalOperator(
            [(c, m) for c, m in self.terms if abs(c) >= tol], self.n_qubits
        )


@dataclass(frozen=True)
class PermutationOperator:
    """Fixed-point-free bit-flip permutation: |z> -> |z XOR x_mask>."""

    x_mask: int

    def __post_init__(self):
        if self.x_mask <= 0:
            raise ValueError("permutation must flip at least one qubit")

    def apply(self, z: int) -> int:
        return z ^ self.x_mask


@dataclass(frozen=True)
class PmrHamiltonian:
    """H = D0 + sum_i D_i P_i with pairwise distinct flip masks."""

    d0: DiagonalOperator
    terms: tuple[tuple[DiagonalOperator, PermutationOperator], ...]
    n_qubits: int

    def __init__(self, d0, terms, n_qubits: int):
        terms = tuple((d, p) for d, p in terms)
        masks = [p.x_mask for _, p in terms]
        if len(set(masks)) != len(masks):
            raise ValueError("flip masks must be pairwise distinct")
        for _, p in terms:
            _check_mask(p.x_mask, n_qubits, "x_mask")
        if not d0.is_real(tol=0.0):
            raise ValueError("diagonal part must have real coefficients")
        object.__setattr__(self, "d0", d0)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "n_qubits", n_qubits)

    @property
    def m(self) -> int:
        """Number of off-diagonal generalized-permutation terms."""
        return len(self.terms)

    def diagonal_values(self) -> np.ndarray:
        """E_z over all basis states, as a real array."""
        return self.d0.values().real

    def term_values(self, i: int) -> np.ndarray:
        """d_i(z) over all basis states."""
        return self.terms[i][0].values()

    def x_masks(self) -> np.ndarray:
        return np.array([p.x_mask for _, p in self.terms], dtype=np.int64)


@dataclass(frozen=True)
class GammaBounds:
    """Per-term upper bounds gamma[i] >= max_z |d_i(z)| and their sum."""

    gamma: tuple[float, ...]
    gamma_total: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        gamma = tuple(float(g) for g in self.gamma)
        if any(g < 0 for g in gamma):
            raise ValueError("bounds must be nonnegative")
        object.__setattr__(self, "gamma", gamma)
        if self.gamma_total is None:
            object.__setattr__(self, "gamma_total", float(sum(gamma)))


def pauli_to_pmr(strings: list[PauliString]) -> PmrHamiltonian:
    """Convert a real-coefficient Pauli-sum Hamiltonian to PMR form.

    Strings with no X/Y content form D0.  Every other string is rewritten
    with Y = (-i Z) X per qubit, producing a complex diagonal coefficient
    placed left of the bit-flip permutation; strings are then grouped by
    flip mask.  Coefficients smaller than 1e-14 times the largest input
    coefficient are dropped after grouping.
    """
    if not strings:
        raise ValueError("empty Hamiltonian")
    n = strings[0].n_qubits
    if any(s.n_qubits != n for s in strings):
        raise ValueError("all strings must share n_qubits")
    scale = max(abs(s.coefficient) for s in strings)
    tol = MERGE_RTOL * scale

    d0_terms: list[tuple[complex, int]] = []
    groups: dict[int, list[tuple[complex, int]]] = {}
    for s in strings:
        flip = s.x_mask | s.y_mask
        phase = (-1j) ** bin(s.y_mask).count("1")
        diag_mask = s.z_mask | s.y_mask
        coeff = s.coefficient * phase
        if flip == 0:
            d0_terms.append((coeff, diag_mask))
        else:
            groups.setdefault(flip, []).append((coeff, diag_mask))

    d0 = DiagonalOperator(d0_terms, n).pruned(tol)
    terms = []
    for flip in sorted(groups):
        d = DiagonalOperator(groups[flip], n).pruned(tol)
        if d.terms:
            terms.append((d, PermutationOperator(flip)))
    return PmrHamiltonian(d0, terms, n)


def pmr_to_pauli_strings(h: PmrHamiltonian, tol: float = 1e-12) -> list[PauliString]:
    """Expand a PMR Hamiltonian back into real-coefficient Pauli strings.

    Inverse of :func:`pauli_to_pmr`; requires term-wise Hermiticity so that
    every expanded coefficient is real.
    """
    strings: list[PauliString] = []
    scale = max(
        [abs(c) for c, _ in h.d0.terms]
        + [abs(c) for d, _ in h.terms for c, _ in d.terms]
        + [1.0]
    )
    for coeff, mask in h.d0.terms:
        if abs(coeff.imag) > tol * scale:
            raise ValueError("diagonal part is not Hermitian")
        strings.append(PauliString(coeff.real, mask, 0, 0, h.n_qubits))
    for d, p in h.terms:
        for coeff, mask in d.terms:
            y_mask = mask & p.x_mask
            # c * Z_mask X_flip = c * i^{|overlap|} * (Y on overlap) ...
            full = coeff * (1j) ** bin(y_mask).count("1")
            if abs(full.imag) > tol * scale:
                raise ValueError(f"term with flip 0x{p.x_mask:x} is not Hermitian")
            strings.append(
                PauliString(
                    full.real, mask & ~p.x_mask, p.x_mask & ~y_mask, y_mask, h.n_qubits
                )
            )
    return strings


def diagonal_energy(h: PmrHamiltonian, z: int) -> float:
    """E_z = <z|D0|z>; exactly real since D0 carries real coefficients."""
    if z < 0 or z >> h.n_qubits:
        raise ValueError(f"basis index {z} out of range")
    total = 0.0
    for coeff, mask in h.d0.terms:
        total += coeff.real if bin(z & mask).count("1") % 2 == 0 else -coeff.real
    return total


def hopping_strength(h: PmrHamiltonian, i: int, z_after: int) -> complex:
    """d_i(z_after) = <z_after|D_i|z_after>, z_after being the post-flip state."""
    if not 0 <= i < h.m:
        raise IndexError(f"term index {i} out of range for M={h.m}")
    if z_after < 0 or z_after >> h.n_qubits:
        raise ValueError(f"basis index {z_after} out of range")
    return h.terms[i][0].value(z_after)


def gamma_bounds(
    h: PmrHamiltonian,
    mode: str = "exact",
    enumeration_threshold: int = ENUMERATION_THRESHOLD,
) -> GammaBounds:
    """Per-term bounds on max_z |d_i(z)|.

    ``exact`` enumerates all basis states (small N); ``sum_abs`` returns the
    always-valid sum of coefficient magnitudes.
    """
    if mode == "exact":
        if h.n_qubits > enumeration_threshold:
            raise ValueError(
                f"exact bounds need enumeration over 2^{h.n_qubits} states; "
                f"threshold is 2^{enumeration_threshold}"
            )
        gamma = tuple(
            float(np.max(np.abs(h.term_values(i)))) if h.terms else 0.0
            for i in range(h.m)
        )
    elif mode == "sum_abs":
        gamma = tuple(d.sum_abs() for d, _ in h.terms)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return GammaBounds(gamma)


def dense_matrix(h: PmrHamiltonian, threshold: int = DENSE_THRESHOLD) -> np.ndarray:
    """Dense 2^N x 2^N matrix of H in the computational basis (test oracle)."""
    if h.n_qubits > threshold:
        raise ValueError(f"dense matrix limited to N <= {threshold}")
    dim = 1 << h.n_qubits
    mat = np.diag(h.d0.values())
    cols = np.arange(dim)
    for d, p in h.terms:
        rows = cols ^ p.x_mask
        mat[rows, cols] += d.values()[rows]
    return mat


def hermiticity_defect(h: PmrHamiltonian) -> float:
    """max |d_i(z XOR mask_i) - conj(d_i(z))| over terms and states (small N)."""
    defect = 0.0
    dim = 1 << h.n_qubits
    cols = np.arange(dim)
    for d, p in h.terms:
        vals = d.values()
        defect = max(defect, float(np.max(np.abs(vals[cols ^ p.x_mask] - vals.conj()))))
    return defect


@dataclass(frozen=True)
class PhasedPermutationHamiltonian:
    """H = D0 + sum_i (w_i/2) (Theta_i1 + Theta_i2) P_i with pure-phase diagonals.

    ``terms`` holds (weight, phases1, phases2, x_mask) with |phases| = 1
    entrywise; 2M unitary generalized permutations overall.
    """

    d0: DiagonalOperator
    terms: tuple[tuple[float, np.ndarray, np.ndarray, int], ...]
    n_qubits: int

    def dense_matrix(self, threshold: int = DENSE_THRESHOLD) -> np.ndarray:
        if self.n_qubits > threshold:
            raise ValueError(f"dense matrix limited to N <= {threshold}")
        dim = 1 << self.n_qubits
        mat = np.diag(self.d0.values())
        cols = np.arange(dim)
        for weight, ph1, ph2, mask in self.terms:
            rows = cols ^ mask
            mat[rows, cols] += 0.5 * weight * (ph1[rows] + ph2[rows])
        return mat


def alternative_representation(
    h: PmrHamiltonian, g: GammaBounds, tol: float = 1e-12
) -> PhasedPermutationHamiltonian:
    """Rewrite each D_i as gamma_i/2 times a pair of pure-phase diagonals.

    Each diagonal entry d_i(z)/gamma_i = cos(theta) e^{i chi} splits into the
    two unit phases e^{i(chi +/- theta)}; the dense matrix is unchanged.
    """
    terms = []
    for i, (d, p) in enumerate(h.terms):
        gi = g.gamma[i]
        if gi <= 0:
            raise ValueError(f"term {i}: bound must be positive")
        w = d.values() / gi
        mags = np.abs(w)
        if np.any(mags > 1 + tol):
            raise ValueError(
                f"term {i}: |d_i(z)|/gamma_i = {mags.max():.6g} exceeds 1; invalid bound"
            )
        chi = np.angle(w)
        theta = np.arccos(np.clip(mags, 0.0, 1.0))
        terms.append(
            (gi, np.exp(1j * (chi + theta)), np.exp(1j * (chi - theta)), p.x_mask)
        )
    return PhasedPermutationHamiltonian(h.d0, tuple(terms), h.n_qubits)


def parse_hamiltonian(text: str, n_qubits: int | None = None) -> list[PauliString]:
    """Parse the one-term-per-line text format ``<coefficient> <pauli word>``.

    ``#`` starts a comment; blank lines are ignored.  All words must share
    one length (``n_qubits`` if given).
    """
    strings: list[PauliString] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise HamiltonianParseError(
                f"expected '<coefficient> <pauli word>', got {raw.strip()!r}", lineno
            )
        try:
            coeff = float(parts[0])
        except ValueError:
            raise HamiltonianParseError(f"bad coefficient {parts[0]!r}", lineno) from None
        if n_qubits is not None and len(parts[1]) != n_qubits:
            raise HamiltonianParseError(
                f"word length {len(parts[1])} != {n_qubits}", lineno
            )
        try:
            s = PauliString.from_word(coeff, parts[1])
        except ValueError as exc:
            raise HamiltonianParseError(str(exc), lineno) from None
        if n_qubits is None:
            n_qubits = s.n_qubits
        strings.append(s)
    if not strings:
        raise HamiltonianParseError("no terms found", 1)
    return strings


def parse_hamiltonian_file(path) -> list[PauliString]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_hamiltonian(fh.read())


def format_hamiltonian(strings: list[PauliString]) -> str:
    """Render strings in the text format, in a canonical deterministic order."""
    ordered = sorted(strings, key=lambda s: (s.x_mask | s.y_mask, s.z_mask, s.y_mask))
    return "".join(f"{s.coefficient!r} {s.to_word()}\n" for s in ordered)
