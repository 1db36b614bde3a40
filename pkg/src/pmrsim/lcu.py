"""Ancilla-level emulation of the LCU + oblivious-amplitude-amplification circuit.

The composite space is (Q path registers of dimension M+1) x (one qubit
selecting the phase pair) x (the 2^N system).  Register digit 0 marks "no
operator"; valid ancilla patterns have all zeros trailing.  The circuit per
segment is the diagonal phase on the system followed by A = -W R W' R W
with W = B' U_C B, where B prepares the LCU weight state and U_C applies,
conditioned on the ancilla, a diagonal phase pair and the path's bit flips.

Everything is plain state-vector arithmetic; operators are applied
block-by-block and never materialized densely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .divdiff import DdConfig, dd_exp, dd_exp_taylor_batch
from .oracle import DenseOracle
from .pmr import GammaBounds, PmrHamiltonian
from .series import LN2, SegmentPlan, plan_segments

__all__ = [
    "AncillaLayout",
    "CompositeState",
    "LcuConfig",
    "SegmentDiagnostics",
    "prepare_psi0",
    "psi0_unary_cascade",
    "apply_B",
    "compute_phase_angles",
    "apply_U_C",
    "apply_reflection",
    "apply_W",
    "oaa_segment",
    "evolve_lcu",
    "lcu_weights",
    "CompositeBudgetError",
]

DEFAULT_COMPOSITE_BUDGET = 1 << 24


class CompositeBudgetError(RuntimeError):
    """Composite ancilla x system dimension exceeds the configured budget."""


@dataclass(frozen=True)
class AncillaLayout:
    """Index bookkeeping for Q registers of dimension M+1 plus the k qubit.

    The flat ancilla index is big-endian in the path registers with the k
    qubit least significant: a = (sum_j digit_j (M+1)^(Q-1-j)) * 2 + k.
    """

    Q: int
    M: int

    @property
    def anc_dim(self) -> int:
        return (self.M + 1) ** self.Q * 2

    def index(self, path: tuple[int, ...], k: int) -> int:
        if len(path) > self.Q:
            raise ValueError("path longer than Q registers")
        value = 0
        for j in range(self.Q):
            digit = path[j] + 1 if j < len(path) else 0
            if not 0 <= digit <= self.M:
                raise ValueError("term index out of range")
            value = value * (self.M + 1) + digit
        return value * 2 + k

    def digits(self, a: int) -> tuple[tuple[int, ...], int]:
        k = a & 1
        value = a >> 1
        digits = []
        for _ in range(self.Q):
            digits.append(value % (self.M + 1))
            value //= self.M + 1
        return tuple(reversed(digits)), k

    def path_of(self, a: int) -> tuple[tuple[int, ...], int]:
        """Effective 0-based path (zeros dropped) and k for an ancilla index."""
        digits, k = self.digits(a)
        return tuple(d - 1 for d in digits if d > 0), k

    def is_valid(self, a: int) -> bool:
        """Valid patterns have no occupied register after an empty one."""
        digits, _ = self.digits(a)
        seen_zero = False
        for d in digits:
            if d == 0:
                seen_zero = True
            elif seen_zero:
                return False
        return True

    def paths(self):
        """All valid paths in deterministic (length, lexicographic) order."""
        from itertools import product

        for q in range(self.Q + 1):
            yield from product(range(self.M), repeat=q)


@dataclass(frozen=True)
class LcuConfig:
    """Phase quantization, divided-difference method, and s forcing.

    ``phase_bits`` of None keeps phases exact; an integer b rounds each
    angle chi +/- phi up to a multiple of 2 pi / 2^b.  ``s_override``
    re-pads the working bounds so the weight normalization equals the given
    value exactly (useful for forcing s = 2).
    """

    phase_bits: int | None = None
    dd: DdConfig = field(default_factory=DdConfig)
    s_override: float | None = None


@dataclass
class CompositeState:
    """Flat ancilla-major joint state: index = a * 2^N + z."""

    amplitudes: np.ndarray
    layout: AncillaLayout
    n_qubits: int

    @classmethod
    def from_system(
        cls, layout: AncillaLayout, system: np.ndarray
    ) -> "CompositeState":
        system = np.asarray(system, dtype=complex)
        n = system.shape[0].bit_length() - 1
        amps = np.zeros(layout.anc_dim << n, dtype=complex)
        amps[: 1 << n] = system
        return cls(amps, layout, n)

    @property
    def system_dim(self) -> int:
        return 1 << self.n_qubits

    def block(self, a: int) -> np.ndarray:
        dim = self.system_dim
        return self.amplitudes[a * dim : (a + 1) * dim]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "CompositeState":
        return CompositeState(self.amplitudes.copy(), self.layout, self.n_qubits)


def _partial_exp_sum(x: float, order: int) -> float:
    total, term = 1.0, 1.0
    for k in range(1, order + 1):
        term *= x / k
        total += term
    return total


def _solve_weight_rate(order: int, target: float) -> float:
    """x with sum_{q<=order} x^q/q! = target (Newton; monotone in x)."""
    if target <= 1.0:
        raise ValueError("normalization target must exceed 1")
    x = LN2
    for _ in range(100):
        f = _partial_exp_sum(x, order) - target
        fp = _partial_exp_sum(x, order - 1) if order >= 1 else 0.0
        if fp == 0.0:
            raise ValueError("cannot solve for the requested normalization")
        step = f / fp
        x -= step
        if abs(step) < 1e-16 * max(1.0, abs(x)):
            break
    if x <= 0.0:
        raise ValueError(f"no positive weight rate reaches s = {target}")
    return x


def lcu_weights(
    g: GammaBounds, plan: SegmentPlan, config: LcuConfig | None = None
) -> tuple[np.ndarray, float]:
    """Working per-term bounds and normalization s used by the LCU weights.

    Default: the plan's padded bounds with s = sum_{q<=Q} (ln 2)^q/q!.
    With ``s_override`` the bounds are re-padded so the partial sum hits the
    requested s exactly.
    """
    config = config or LcuConfig()
    if config.s_override is None:
        return plan.working_gamma(g), plan.s
    if plan.Q < 1:
        raise ValueError("s_override requires a plan with Q >= 1")
    x = _solve_weight_rate(plan.Q, config.s_override)
    scale = x / (g.gamma_total * abs(plan.delta_t))
    return scale * np.asarray(g.gamma, dtype=float), float(config.s_override)


def psi0_unary_cascade(
    g: GammaBounds, plan: SegmentPlan, config: LcuConfig | None = None
) -> np.ndarray:
    """First preparation step: the normalized unary-occupation ladder
    sum_q sqrt((Gamma dt)^q / q!) |1^q 0^(Q-q)> over the path registers."""
    gam, _ = lcu_weights(g, plan, config)
    m = len(g.gamma)
    reg_dim = (m + 1) ** plan.Q
    vec = np.zeros(reg_dim, dtype=float)
    rate = float(np.sum(gam)) * abs(plan.delta_t)
    amp = 1.0
    for q in range(plan.Q + 1):
        if q > 0:
            amp *= rate / q  # (Gamma dt)^q / q!
        idx = 0
        for j in range(plan.Q):
            digit = 1 if j < q else 0
            idx = idx * (m + 1) + digit
        vec[idx] = math.sqrt(amp)
    return vec / np.linalg.norm(vec)


def prepare_psi0(
    g: GammaBounds, plan: SegmentPlan, config: LcuConfig | None = None
) -> np.ndarray:
    """LCU weight state over the ancilla registers.

    Built by the two-step cascade: the unary ladder fixes the path-length
    sector masses (Gamma dt)^q / q!, each occupied register then fans out
    to sqrt(gamma_i / Gamma), and the k qubit gets a Hadamard.  The result
    carries amplitude sqrt(gamma_path |dt|^q / q!) / sqrt(2 s) on every
    valid pattern.
    """
    gam, _ = lcu_weights(g, plan, config)
    m = len(g.gamma)
    layout = AncillaLayout(plan.Q, m)
    unary = psi0_unary_cascade(g, plan, config)
    total = float(np.sum(gam))
    frac = np.sqrt(gam / total) if total > 0 else np.zeros(m)
    vec = np.zeros(layout.anc_dim, dtype=float)
    for path in layout.paths():
        q = len(path)
        unary_idx = 0
        for j in range(plan.Q):
            unary_idx = unary_idx * (m + 1) + (1 if j < q else 0)
        amp = unary[unary_idx] * float(np.prod(frac[list(path)])) if q else unary[unary_idx]
        for k in (0, 1):
            vec[layout.index(path, k)] = amp / math.sqrt(2.0)
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        raise ValueError("degenerate weight state (all bounds zero)")
    return vec / norm


def apply_B(
    state: CompositeState, psi0: np.ndarray, direction: str = "forward"
) -> CompositeState:
    """Unitary completion of |0...0> -> psi0 on the ancilla factor.

    Implemented as the Householder reflection exchanging the two vectors;
    it is real and self-inverse, so forward and inverse coincide.
    """
    if direction not in ("forward", "inverse"):
        raise ValueError(f"unknown direction {direction!r}")
    dim = state.system_dim
    mat = state.amplitudes.reshape(state.layout.anc_dim, dim)
    v = psi0.astype(complex).copy()
    v[0] -= 1.0
    vnorm2 = float(np.real(np.vdot(v, v)))
    if vnorm2 > 0.0:
        mat = mat - np.outer(v, (2.0 / vnorm2) * (v.conj() @ mat))
    return CompositeState(mat.reshape(-1), state.layout, state.n_qubits)


def _quantize_angle(theta: np.ndarray, bits: int) -> np.ndarray:
    """Round angles up to the b-bit grid 2 pi m / 2^b, m integer."""
    step = 2.0 * math.pi / (2.0 ** bits)
    wrapped = np.mod(theta, 2.0 * math.pi)
    return np.ceil(wrapped / step) * step


def _path_tables(
    h: PmrHamiltonian,
    gam: np.ndarray,
    plan: SegmentPlan,
    config: LcuConfig,
    path: tuple[int, ...],
    energies: np.ndarray,
    d_tab: np.ndarray,
):
    """Per-source phase pair (e^{i theta_0}, e^{i theta_1}) and flip mask."""
    dim = 1 << h.n_qubits
    q = len(path)
    if q == 0:
        ones = np.ones(dim, dtype=complex)
        return 0, ones, ones.copy()
    cum = 0
    seq = np.zeros((dim, q + 1), dtype=float)
    dprod = np.ones(dim, dtype=complex)
    z = np.arange(dim)
    for j, i in enumerate(path):
        cum ^= int(h.terms[i][1].x_mask)
        dest = z ^ cum
        seq[:, j + 1] = energies[dest] - energies
        dprod *= d_tab[i][dest]
    if config.dd.method == "taylor":
        dd = dd_exp_taylor_batch(seq, plan.delta_t, config.dd.series_tol)
    else:
        dd = np.array([dd_exp(row, plan.delta_t, config.dd) for row in seq])
    gam_path = float(np.prod(gam[list(path)]))
    weight = gam_path * abs(plan.delta_t) ** q / math.factorial(q)
    if weight == 0.0:
        beta = np.zeros(dim, dtype=complex)
    else:
        beta = dd * dprod / weight
    mag = np.abs(beta)
    chi = np.where(mag > 0, np.angle(beta), 0.0)
    phi = np.arccos(np.clip(mag, 0.0, 1.0))
    theta0, theta1 = chi + phi, chi - phi
    if config.phase_bits is not None:
        theta0 = _quantize_angle(theta0, config.phase_bits)
        theta1 = _quantize_angle(theta1, config.phase_bits)
    return cum, np.exp(1j * theta0), np.exp(1j * theta1)


def compute_phase_angles(
    h: PmrHamiltonian,
    g: GammaBounds,
    plan: SegmentPlan,
    z: int,
    path,
    config: LcuConfig | None = None,
) -> tuple[float, float]:
    """(chi, phi) with beta = cos(phi) e^{i chi} for one path and source.

    With finite phase_bits both chi +/- phi are first rounded to the b-bit
    grid; the returned pair reconstructs the quantized beta.
    """
    config = config or LcuConfig()
    indices = tuple(path.indices) if hasattr(path, "indices") else tuple(path)
    if len(indices) > plan.Q:
        raise ValueError(f"path length {len(indices)} exceeds plan order Q={plan.Q}")
    gam, _ = lcu_weights(g, plan, config)
    energies = h.diagonal_values()
    d_tab = np.array([h.term_values(i) for i in range(h.m)]) if h.m else np.empty((0, 2))
    _, ph0, ph1 = _path_tables(h, gam, plan, config, indices, energies, d_tab)
    theta0 = float(np.angle(ph0[z]))
    theta1 = float(np.angle(ph1[z]))
    return 0.5 * (theta0 + theta1), 0.5 * (theta0 - theta1)


class SegmentOperators:
    """Cached per-plan tables: the weight state and per-path phase pairs."""

    def __init__(
        self,
        h: PmrHamiltonian,
        g: GammaBounds,
        plan: SegmentPlan,
        config: LcuConfig | None = None,
    ):
        self.h = h
        self.plan = plan
        self.config = config or LcuConfig()
        self.layout = AncillaLayout(plan.Q, h.m)
        self.gam, self.s = lcu_weights(g, plan, self.config)
        self.psi0 = prepare_psi0(g, plan, self.config)
        self._energies = h.diagonal_values()
        self._d_tab = np.array([h.term_values(i) for i in range(h.m)])
        self._tables: dict[tuple[int, ...], tuple] = {}

    def tables(self, path: tuple[int, ...]):
        if path not in self._tables:
            self._tables[path] = _path_tables(
                self.h, self.gam, self.plan, self.config, path,
                self._energies, self._d_tab,
            )
        return self._tables[path]

    def diagonal_phases(self) -> np.ndarray:
        return np.exp(-1j * self.plan.delta_t * self._energies)


def apply_U_C(
    state: CompositeState,
    ops: SegmentOperators,
    direction: str = "forward",
) -> CompositeState:
    """Controlled phase-then-permutation, block-diagonal over the ancilla.

    For ancilla pattern (i_1...i_q, k) the system picks up the phase
    e^{i(chi + (-1)^k phi)} evaluated at its current basis state and is then
    flipped by the path's cumulative mask.  Zero-amplitude blocks are
    skipped; ancilla indices never mix.
    """
    if direction not in ("forward", "inverse"):
        raise ValueError(f"unknown direction {direction!r}")
    dim = state.system_dim
    out = state.copy()
    mat = out.amplitudes.reshape(state.layout.anc_dim, dim)
    z = np.arange(dim)
    active = np.flatnonzero(np.any(mat != 0, axis=1))
    for a in active:
        block = mat[a]
        path, k = state.layout.path_of(int(a))
        cum, ph0, ph1 = ops.tables(path)
        phases = ph0 if k == 0 else ph1
        if direction == "forward":
            mat[a] = (phases * block)[z ^ cum]
        else:
            mat[a] = phases.conj() * block[z ^ cum]
    return out


def apply_reflection(state: CompositeState) -> CompositeState:
    """R = 1 - 2(|0><0|)^{x(Q+1)}: flips the sign of the ancilla-zero block."""
    out = state.copy()
    out.block(0)[:] *= -1.0
    return out


def apply_W(
    state: CompositeState, ops: SegmentOperators, dagger: bool = False
) -> CompositeState:
    """W = B' U_C B (B is the Householder completion, self-inverse)."""
    state = apply_B(state, ops.psi0)
    state = apply_U_C(state, ops, "inverse" if dagger else "forward")
    return apply_B(state, ops.psi0)


def _trace_distance_pure(phi: np.ndarray, u: np.ndarray) -> float:
    """Trace norm of |phi><phi| - |u><u| (rank-2, computed in the 2-d span)."""
    b = float(np.real(np.vdot(u, u)))
    if b == 0.0:
        return float(np.real(np.vdot(phi, phi)))
    v1 = u / math.sqrt(b)
    a1 = complex(np.vdot(v1, phi))
    w = phi - a1 * v1
    n2 = float(np.real(np.vdot(w, w)))
    if n2 < 1e-30:
        return abs(abs(a1) ** 2 - b)
    a2 = math.sqrt(n2)
    delta = np.array(
        [
            [abs(a1) ** 2 - b, a1 * np.conj(a2)],
            [np.conj(a1) * a2, a2 ** 2],
        ],
        dtype=complex,
    )
    eig = np.linalg.eigvalsh(delta)
    return float(np.sum(np.abs(eig)))


@dataclass
class SegmentDiagnostics:
    """Per-segment health figures for the amplified LCU step."""

    s: float
    anc_zero_weight: float
    discarded_weight: float
    trace_residual: float | None = None


def oaa_segment(
    state: CompositeState,
    ops: SegmentOperators,
    oracle: DenseOracle | None = None,
) -> tuple[CompositeState, SegmentDiagnostics]:
    """One amplified short-time step: diagonal phase then A = -W R W' R W.

    The input must live in the ancilla-zero block.  Diagnostics report the
    ancilla-zero weight of the output and, when a dense oracle is supplied,
    the trace distance between the traced-out post-selected state and the
    ideal short-time evolution of the (normalized) input.
    """
    off_weight = state.norm() ** 2 - float(np.linalg.norm(state.block(0))) ** 2
    if off_weight > 1e-9:
        raise ValueError("oaa_segment expects the ancilla in |0...0>")
    sys_in = state.block(0).copy()
    work = state.copy()
    work.block(0)[:] = ops.diagonal_phases() * sys_in
    work = apply_W(work, ops)
    work = apply_reflection(work)
    work = apply_W(work, ops, dagger=True)
    work = apply_reflection(work)
    work = apply_W(work, ops)
    work.amplitudes *= -1.0
    weight = float(np.linalg.norm(work.block(0))) ** 2
    residual = None
    if oracle is not None:
        norm_in = np.linalg.norm(sys_in)
        if norm_in > 0:
            ideal = oracle.evolve(sys_in / norm_in, ops.plan.delta_t)
            residual = _trace_distance_pure(work.block(0) / norm_in, ideal)
    diag = SegmentDiagnostics(
        s=ops.s,
        anc_zero_weight=weight,
        discarded_weight=max(0.0, state.norm() ** 2 - weight),
        trace_residual=residual,
    )
    return work, diag


def evolve_lcu(
    h: PmrHamiltonian,
    g: GammaBounds,
    state: np.ndarray,
    t: float,
    epsilon: float,
    config: LcuConfig | None = None,
    composite_budget: int = DEFAULT_COMPOSITE_BUDGET,
    with_residuals: bool | None = None,
) -> tuple[np.ndarray, list[SegmentDiagnostics]]:
    """Run r amplified segments, post-selecting the ancilla-zero block.

    Between segments the off-block amplitude is discarded (recorded in the
    diagnostics) and the system re-normalized.  Diagonal-only plans evolve
    exactly without ancillas.
    """
    config = config or LcuConfig()
    state = np.asarray(state, dtype=complex)
    plan = plan_segments(h, g, t, epsilon)
    if plan.diagonal_only:
        from .series import apply_diagonal

        return apply_diagonal(h, state, t), []
    composite_dim = (h.m + 1) ** plan.Q * 2 * (1 << h.n_qubits)
    if composite_dim > composite_budget:
        raise CompositeBudgetError(
            f"composite dimension (M+1)^Q * 2 * 2^N = "
            f"({h.m + 1})^{plan.Q} * 2 * 2^{h.n_qubits} = {composite_dim} "
            f"exceeds budget {composite_budget}"
        )
    ops = SegmentOperators(h, g, plan, config)
    if with_residuals is None:
        with_residuals = h.n_qubits <= 6
    oracle = DenseOracle(h) if with_residuals else None
    diags: list[SegmentDiagnostics] = []
    sys = state
    for _ in range(plan.r):
        comp = CompositeState.from_system(ops.layout, sys)
        comp, diag = oaa_segment(comp, ops, oracle)
        diags.append(diag)
        sys = comp.block(0).copy()
        norm = np.linalg.norm(sys)
        if norm == 0.0:
            raise ArithmeticError("post-selection lost all amplitude")
        sys = sys / norm
    return sys, diags
