"""Model builders, dimensionless-time records, and the cost-formula table."""

import math

import numpy as np
import pytest
from conftest import PAULI_MATS

from pmrsim import dense_matrix, gamma_bounds, plan_segments
from pmrsim.models import (
    PlaneWaveData,
    build_electronic_structure,
    build_fermi_hubbard,
    build_named_model,
    build_schwinger,
    build_table3_model,
    electronic_structure_times,
)
from pmrsim.pmr import hermiticity_defect
from pmrsim.resources import (
    COMPARISON_HEADER,
    CostParams,
    comparison_csv,
    comparison_row,
    resource_table,
)

I2 = PAULI_MATS["I"]


def op_on(op, q, n_qubits):
    mat = np.array([[1.0 + 0j]])
    for j in range(n_qubits):
        mat = np.kron(op if j == q else I2, mat)
    return mat


class TestTableThreeRows:
    def test_zz_only_row(self):
        J = np.array([[0.0, 0.4, -0.2], [0.0, 0.0, 0.7], [0.0, 0.0, 0.0]])
        h, rec = build_table3_model("zz_only", J=J, t=2.0)
        assert h.m == 0 and rec.m_terms == 0
        assert rec.lcu_count_quoted == 0
        assert rec.T == 0.0
        assert rec.T_prime == pytest.approx(2.0 * np.sum(np.abs(J)))
        assert rec.taylor_terms == 9

    def test_zz_zx_uniform_couplings(self):
        # all couplings equal: T = t * N * (N * Jt) by the column-sum rule
        n, jt, t = 4, 0.5, 1.3
        J = np.zeros((n, n))
        Jt = np.full((n, n), jt)
        h, rec = build_table3_model("zz_zx", J=J, J_tilde=Jt, t=t)
        assert rec.T == pytest.approx(t * n * n * jt)
        assert rec.T_prime == pytest.approx(t * n * n * jt)
        assert h.m == n
        assert rec.lcu_count_quoted == n + 1
        for d, p in h.terms:
            assert bin(p.x_mask).count("1") == 1
            assert len(d.terms) == n - 1

    def test_columnwise_cancellation_zeroes_T(self):
        # sum_i Jt_ij = 0 for every column: grouped time vanishes while the
        # per-string time stays positive
        n = 3
        Jt = np.array([[0.0, 0.6, -0.3], [0.5, 0.0, 0.3], [-0.5, -0.6, 0.0]])
        assert np.allclose(Jt.sum(axis=0), 0.0)
        J = np.zeros((n, n))
        _, rec = build_table3_model("zz_zx", J=J, J_tilde=Jt, t=1.0)
        assert rec.T == 0.0
        assert rec.T_prime > 0.0

    def test_zzz_zzx_row(self):
        n = 3
        J = np.zeros((n, n, n))
        Jt = np.zeros((n, n, n))
        Jt[0, 1, 2] = 0.4
        Jt[1, 0, 2] = 0.3
        Jt[0, 2, 1] = -0.2
        h, rec = build_table3_model("zzz_zzx", J=J, J_tilde=Jt, t=1.0)
        assert rec.lcu_count_quoted == n
        assert rec.T == pytest.approx(abs(0.4 + 0.3) + abs(-0.2))
        assert rec.taylor_terms == 2 * n ** 3
        assert hermiticity_defect(h) < 1e-14

    def test_rows_reconstruct_densely(self):
        n = 3
        J = np.triu(np.random.default_rng(1).uniform(-1, 1, (n, n)), k=1)
        Jt = np.random.default_rng(2).uniform(-1, 1, (n, n)) * (1 - np.eye(n))
        h, _ = build_table3_model("zz_zx", J=J, J_tilde=Jt)
        expected = np.zeros((2 ** n, 2 ** n), complex)
        for i in range(n):
            for j in range(n):
                if J[i, j]:
                    expected += J[i, j] * op_on(PAULI_MATS["Z"], i, n) @ op_on(
                        PAULI_MATS["Z"], j, n
                    )
                if Jt[i, j]:
                    expected += Jt[i, j] * op_on(PAULI_MATS["Z"], i, n) @ op_on(
                        PAULI_MATS["X"], j, n
                    )
        assert np.max(np.abs(dense_matrix(h) - expected)) < 1e-12


def jwt_fermi_hubbard_dense(n_sites, u, t_h, bonds):
    """Independent dense build from fermionic operators; annihilation is
    Z-string times (X - iY)/2, so occupation is (1 + Z)/2."""
    nq = 2 * n_sites
    X, Y, Z = PAULI_MATS["X"], PAULI_MATS["Y"], PAULI_MATS["Z"]

    def lower(q, sector):
        mat = (op_on(X, q, nq) - 1j * op_on(Y, q, nq)) / 2
        for k in range(sector * n_sites, q):
            mat = mat @ op_on(Z, k, nq)
        return mat

    dim = 1 << nq
    ham = np.zeros((dim, dim), complex)
    for j in range(n_sites):
        n_up = lower(j, 0).conj().T @ lower(j, 0)
        n_dn = lower(n_sites + j, 1).conj().T @ lower(n_sites + j, 1)
        ham += u * n_up @ n_dn
    for i, j in bonds:
        i, j = min(i, j), max(i, j)
        for s in (0, 1):
            qi, qj = s * n_sites + i, s * n_sites + j
            hop = lower(qi, s).conj().T @ lower(qj, s)
            ham += -t_h * (hop + hop.conj().T)
    return ham


class TestFermiHubbard:
    def test_dimensionless_time_value(self):
        _, rec = build_fermi_hubbard(4, d=1, u=2.5, t_h=1.0, t=1.0)
        assert rec.T == 4.0

    def test_time_independent_of_interaction(self):
        _, a = build_fermi_hubbard(4, u=0.1, t_h=1.0, t=1.0)
        _, b = build_fermi_hubbard(4, u=250.0, t_h=1.0, t=1.0)
        assert a.T == b.T

    def test_dense_matches_fermionic_build(self):
        h, _ = build_fermi_hubbard(2, u=1.7, t_h=0.9)
        ref = jwt_fermi_hubbard_dense(2, 1.7, 0.9, [(0, 1)])
        assert np.max(np.abs(dense_matrix(h) - ref)) < 1e-12

    def test_projector_structure_of_bond_diagonals(self):
        h, rec = build_fermi_hubbard(4, u=3.0, t_h=1.0)
        g = gamma_bounds(h, "exact")
        # grouped bond diagonal is -(t_h/2)(1 - ZZ) Zs: max-norm t_h
        assert all(gi == pytest.approx(1.0) for gi in g.gamma)
        assert rec.T_maxnorm == pytest.approx(8.0)
        assert rec.m_terms == 8 and rec.lcu_count_quoted == 4

    def test_taylor_record(self):
        _, rec = build_fermi_hubbard(4, u=2.0, t_h=1.0, t=1.0)
        assert rec.taylor_terms == 3 * 4 + 2 * 4
        assert rec.T_prime == pytest.approx(3 * 4 * 2.0 * 1.0 + 2 * rec.T)

    def test_small_lattice_rejected(self):
        with pytest.raises(ValueError):
            build_fermi_hubbard(1)

    def test_custom_adjacency(self):
        h, _ = build_fermi_hubbard(3, adjacency=[(0, 1), (1, 2)])
        assert h.m == 4  # two bonds, two spins


def schwinger_dense_reference(n, mass, g, a, eps0):
    """Direct dense build of the displayed spin Hamiltonian."""
    X, Y, Z = PAULI_MATS["X"], PAULI_MATS["Y"], PAULI_MATS["Z"]
    dim = 1 << n
    ham = np.zeros((dim, dim), complex)
    for i in range(n - 1):
        ham += (op_on(X, i, n) @ op_on(X, i + 1, n) + op_on(Y, i, n) @ op_on(Y, i + 1, n)) / (
            2 * a ** 2 * g ** 2
        )
    for j in range(1, n + 1):
        ham += (mass / (a * g ** 2)) * (-1.0) ** j * op_on(Z, j - 1, n)
    for i in range(1, n):
        acc = eps0 * np.eye(dim, dtype=complex)
        for j in range(1, i + 1):
            acc += 0.5 * (op_on(Z, j - 1, n) + (-1.0) ** j * np.eye(dim))
        ham += acc @ acc
    return ham


class TestSchwinger:
    def test_gamma_conventions(self):
        h, rec = build_schwinger(4, mass=0.3, coupling=1.2, spacing=0.7, t=1.0)
        w = 1.0 / (2 * 0.7 ** 2 * 1.2 ** 2)
        g = gamma_bounds(h, "exact")
        assert all(gi == pytest.approx(2 * w) for gi in g.gamma)  # exact max-norm
        assert rec.T == pytest.approx(4 * w)  # quoted convention
        assert rec.T_maxnorm == pytest.approx(3 * 2 * w)
        assert rec.m_terms == 3 and rec.lcu_count_quoted == 4

    def test_dense_matches_direct_build(self):
        for params in [(2, 0.0, 1.0, 1.0, 0.0), (3, 0.5, 1.3, 0.8, 0.2)]:
            n, mass, g_c, a, eps0 = params
            h, _ = build_schwinger(n, mass=mass, coupling=g_c, spacing=a, eps0=eps0)
            ref = schwinger_dense_reference(n, mass, g_c, a, eps0)
            assert np.max(np.abs(dense_matrix(h) - ref)) < 1e-12

    def test_bond_annihilates_aligned_neighbors(self):
        h, _ = build_schwinger(4, mass=0.5, coupling=1.0, spacing=1.0)
        for i in range(h.m):
            d, p = h.terms[i]
            lo = (p.x_mask & -p.x_mask).bit_length() - 1
            for z in range(16):
                if ((z >> lo) & 1) == ((z >> (lo + 1)) & 1):
                    assert d.value(z) == 0

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            build_schwinger(1, 0.1, 1.0, 1.0)
        with pytest.raises(ValueError):
            build_schwinger(3, 0.1, 0.0, 1.0)
        with pytest.raises(ValueError):
            build_schwinger(3, 0.1, 1.0, 0.0)


class TestElectronicStructure:
    def make_data(self, n=2):
        return PlaneWaveData(
            k_vectors=np.array([[1.0, 0, 0], [0.6, 0.2, 0], [0, 0, 0]]),
            r_points=np.array([[float(p), 0, 0] for p in range(n)]),
            r_nuclei=np.array([[0.3, 0, 0]]),
            zeta=np.array([1.5]),
            omega=3.0,
            n_basis=n,
        )

    def test_zero_harmonic_dropped(self):
        data = self.make_data()
        assert data.k_vectors.shape[0] == 2

    def test_times_match_direct_loops(self):
        data = self.make_data()
        t = 1.7
        times = electronic_structure_times(data, t)
        n = data.n_basis
        ks = data.k_vectors
        k2s = [float(k @ k) for k in ks]
        T_hand = 0.0
        for p in range(n):
            for q in range(n):
                if p == q:
                    continue
                inner = sum(
                    k2 * math.cos(float(k @ (data.r_points[q] - data.r_points[p])))
                    for k, k2 in zip(ks, k2s)
                )
                T_hand += abs(inner)
        T_hand *= t * (n - 1)
        assert times.T == pytest.approx(T_hand, rel=1e-12)
        first = sum(
            (math.pi / (data.omega * k2) + k2 / (2 * n))
            * abs(math.cos(float(k @ (data.r_points[q] - data.r_points[p]))))
            for p in range(n)
            for q in range(n)
            if p != q
            for k, k2 in zip(ks, k2s)
        )
        second = 2 * sum(
            abs(
                math.pi / (data.omega * k2)
                - k2 / (4 * n)
                + (2 * math.pi / data.omega)
                * sum(
                    z * math.cos(float(k @ (R - data.r_points[p])))
                    for z, R in zip(data.zeta, data.r_nuclei)
                )
                / k2
            )
            for p in range(n)
            for k, k2 in zip(ks, k2s)
        )
        assert times.T_prime == pytest.approx(t * (first + second), rel=1e-12)
        assert times.m_terms == 2 * (n * n - n)
        assert times.taylor_terms == 2 * n + 6 * (n * n - n)

    def test_engineered_cancellation(self):
        # two opposite-phase harmonics cancel the cosine sum exactly
        data = PlaneWaveData(
            k_vectors=np.array([[math.pi / 2, 0, 0], [3 * math.pi / 2, 0, 0]]),
            r_points=np.array([[0.0, 0, 0], [1.0, 0, 0]]),
            r_nuclei=np.array([[0.0, 0, 0]]),
            zeta=np.array([1.0]),
            omega=1.0,
            n_basis=2,
        )
        k2a = (math.pi / 2) ** 2
        k2b = (3 * math.pi / 2) ** 2
        # cos(pi/2) = cos(3 pi/2) = 0 at unit displacement
        times = electronic_structure_times(data, 1.0)
        assert times.T == pytest.approx(0.0, abs=1e-12)
        assert times.T_prime > 0.0

    def test_builder_hermitian_and_consistent(self):
        data = self.make_data()
        h, rec = build_electronic_structure(data, t=1.0)
        assert h.n_qubits == 4
        mat = dense_matrix(h)
        assert np.max(np.abs(mat - mat.conj().T)) < 1e-12
        assert hermiticity_defect(h) < 1e-12
        # quoted count uses ordered (p, q) pairs; grouping keeps one term
        # per unordered pair and spin
        assert rec.lcu_count_quoted == 2 * (2 * 2 - 2)
        assert rec.m_terms == 2

    def test_T_below_T_prime_on_random_draws(self):
        # long-wavelength draws: with k^4 <= pi / (Omega (N-1)) the Coulomb
        # 1/k^2 terms dominate the Pauli-basis time, which is the regime the
        # interference advantage T << T' refers to
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(2, 5))
            n_nu = int(rng.integers(8, 20))
            data = PlaneWaveData(
                k_vectors=rng.uniform(-0.3, 0.3, size=(n_nu, 3)),
                r_points=rng.uniform(-2, 2, size=(n, 3)),
                r_nuclei=rng.uniform(-1, 1, size=(2, 3)),
                zeta=rng.uniform(1, 6, size=2),
                omega=float(rng.uniform(1.0, 3.0)),
                n_basis=n,
            )
            times = electronic_structure_times(data, float(rng.uniform(0.1, 3.0)))
            assert times.T <= times.T_prime


class TestResourceTable:
    def test_minimal_instantiation(self):
        h, _ = build_named_model("zz_zx", 2)
        g = gamma_bounds(h)
        plan = plan_segments(h, g, 1.0, 1e-2, q_override=1)
        cp = CostParams(k_d=2, k_od=1, c_d0=3, c_dd0=2, c_d=1)
        est = resource_table(h, g, plan, cp)
        # M = 2, Q = 1: W cost = Q^2 + Q M (c_dd0 + k_od + log2 M) = 1 + 2*4
        assert est.rows["W"][0] == 9
        assert est.rows["short_time_evolution"][0] == 3 + 9
        assert est.rows["diagonal_evolution"] == (3, 1)
        assert est.rows["U_CP"][0] == math.ceil(1 * 2 * (1 + 1))
        assert est.qubit_cost == math.ceil(1 * math.log2(3)) + 1
        assert est.gates_total == plan.r * est.gate_cost_segment

    def test_single_term_log_vanishes(self):
        from pmrsim import PauliString, pauli_to_pmr

        # M = 1: the log2 M contribution drops out entirely
        h = pauli_to_pmr(
            [PauliString.from_word(1.0, "ZZ"), PauliString.from_word(0.5, "XI")]
        )
        g = gamma_bounds(h)
        plan = plan_segments(h, g, 0.5, 1e-2, q_override=1)
        cp = CostParams(k_d=2, k_od=1, c_d0=1, c_dd0=2, c_d=1)
        est = resource_table(h, g, plan, cp)
        assert est.rows["U_CP"][0] == 1 * 1 * (1 + 0)
        assert est.rows["W"][0] == 1 + 1 * 1 * (2 + 1 + 0)
        assert est.rows["short_time_evolution"][0] == 1 + 4
        assert est.qubit_cost == 2  # ceil(1 * log2 2) + 1

    def test_gate_cost_linear_in_m(self):
        # doubling M at fixed Q doubles the Q M (k_od + log2 M) term once
        # the log factor is divided out
        cp = CostParams(k_d=2, k_od=2, c_d0=1, c_dd0=1, c_d=1)
        qm = []
        for n in (2, 4):  # integral log2 keeps the division exact
            h, _ = build_named_model("zz_zx", n)
            g = gamma_bounds(h)
            plan = plan_segments(h, g, 1.0, 1e-2, q_override=2)
            w = resource_table(h, g, plan, cp).rows["U_CP"][0]
            qm.append(w / (cp.k_od + math.log2(n)))
        assert qm[1] == pytest.approx(2 * qm[0])

    def test_cost_params_from_hamiltonian(self):
        h, _ = build_fermi_hubbard(3, u=2.0, t_h=1.0)
        cp = CostParams.from_hamiltonian(h)
        assert cp.k_od == 2  # bond flips act on two qubits
        assert cp.k_d == 2  # up-down ZZ on a site
        assert cp.c_d0 >= 1 and cp.c_dd0 >= 1 and cp.c_d >= 1

    def test_positive_validation(self):
        with pytest.raises(ValueError):
            CostParams(k_d=0, k_od=1, c_d0=1, c_dd0=1, c_d=1)


class TestComparisonCsv:
    def test_header_and_row_fields(self):
        h, rec = build_fermi_hubbard(4, u=1.5, t_h=1.0, t=1.0)
        g = gamma_bounds(h)
        row = comparison_row(h, rec, g, t=1.0, epsilon=1e-3)
        text = comparison_csv([row])
        lines = text.strip().split("\n")
        assert lines[0] == COMPARISON_HEADER
        fields = lines[1].split(",")
        assert fields[0] == "fermi_hubbard"
        assert fields[1] == "8" and fields[2] == "8"
        assert float(fields[4]) == 4.0

    def test_zz_only_row_through_csv(self):
        h, rec = build_named_model("zz_only", 3)
        row = comparison_row(h, rec, gamma_bounds(h), t=1.0, epsilon=1e-3)
        assert row["T"] == 0.0 and row["M"] == 0
        assert row["Q"] == 0 and row["r"] == 1


class TestBuilderInvariants:
    def test_all_builders_pass_hermiticity_and_bounds(self):
        cases = [
            build_named_model("zz_only", 3),
            build_named_model("zz_zx", 3),
            build_named_model("zzz_zzx", 3),
            build_named_model("fermi_hubbard", 2),
            build_named_model("schwinger", 3),
            build_named_model("electronic_structure", 2),
        ]
        for h, rec in cases:
            assert hermiticity_defect(h) < 1e-12
            mat = dense_matrix(h)
            assert np.max(np.abs(mat - mat.conj().T)) < 1e-12
            if rec.T_maxnorm is not None and rec.model != "zz_zx":
                exact = gamma_bounds(h, "exact").gamma_total
                assert exact <= rec.T_maxnorm / max(1e-30, 1.0) + 1e-12

    def test_T_not_above_T_prime_for_nonnegative_couplings(self):
        for name, n in (("zz_zx", 4), ("fermi_hubbard", 3), ("schwinger", 4)):
            _, rec = build_named_model(name, n)
            assert rec.T <= rec.T_prime + 1e-12

    def test_unknown_model_rejected(self):
        with pytest.raises(ValueError):
            build_named_model("ising_3d", 4)
