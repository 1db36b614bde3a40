"""Shared test helpers: instance generators and independent dense oracles."""

import math

import numpy as np

from pmrsim import PauliString, dd_exp_taylor, pauli_to_pmr

I2 = np.eye(2, dtype=complex)
PAULI_MATS = {
    "I": I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_dense(strings):
    """Dense Pauli-sum oracle built by explicit Kronecker products."""
    dim = 1 << strings[0].n_qubits
    total = np.zeros((dim, dim), dtype=complex)
    for s in strings:
        mat = np.array([[1.0 + 0j]])
        for ch in s.to_word():
            mat = np.kron(PAULI_MATS[ch], mat)
        total += s.coefficient * mat
    return total


def conditioned_dd_instance(rng, q_max=12, amp_max=8.0):
    """Random divided-difference instance on which all four methods are
    numerically meaningful in float64.

    Nodes sit on a jittered even grid (the defining naive sum needs
    separated nodes), |t| * spread stays above q/3 (the pyramid recursion
    amplifies rounding by ~q/(|t| * spread) per level), and instances whose
    value is deeply cancelled relative to the |t|^q/q! envelope are redrawn.
    """
    while True:
        q = int(rng.integers(1, q_max + 1))
        spread = float(rng.uniform(0.5, 2.0))
        if q == 1:
            x = np.array([0.0, spread])
        else:
            base = np.linspace(0.0, spread, q + 1)
            jitter = rng.uniform(-0.3, 0.3, size=q + 1) * (spread / q)
            x = np.sort(base + jitter)
        x = x - x.mean() + rng.uniform(-0.5, 0.5)
        amp_min = max(0.4, q / 3.0)
        amp = float(rng.uniform(amp_min, amp_max))
        t = amp / max(x.max() - x.min(), 1e-6)
        value = dd_exp_taylor(x, t)
        envelope = abs(t) ** q / math.factorial(q)
        if abs(value) >= 1e-2 * envelope:
            return x, t, value


def random_pmr_hamiltonian(rng, n=4, m_terms=4, n_diag=3, coupling=1.0):
    """Random PMR Hamiltonian built from Pauli strings with |coefficients|
    below ``coupling`` and at most ``m_terms`` distinct flip patterns."""
    masks = []
    target = min(m_terms, (1 << n) - 1)
    while len(masks) < target:
        mask = int(rng.integers(1, 1 << n))
        if mask not in masks:
            masks.append(mask)
    strings = []
    for _ in range(n_diag):
        strings.append(
            PauliString(
                float(rng.uniform(-coupling, coupling)),
                int(rng.integers(1, 1 << n)),
                0,
                0,
                n,
            )
        )
    for flip in masks:
        bits = [b for b in range(n) if flip >> b & 1]
        y = (1 << bits[int(rng.integers(0, len(bits)))]) if rng.random() < 0.4 else 0
        z = int(rng.integers(0, 1 << n)) & ~flip
        strings.append(
            PauliString(float(rng.uniform(-coupling, coupling)), z, flip & ~y, y, n)
        )
    return pauli_to_pmr(strings)


def random_state(rng, n_qubits):
    psi = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return psi / np.linalg.norm(psi)
