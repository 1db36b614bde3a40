"""Segmented evolution by the truncated off-diagonal series.

The evolution e^{-iHt} is split into r identical segments U_od e^{-i dt D0}.
Each segment's off-diagonal factor is the sum over flip paths
(i_1, ..., i_q), q <= Q, of e^{-i dt [0, dE_1, ..., dE_q]} * prod_j d_{i_j}
deposited at the flipped basis state.  Everything here is matrix-free state
arithmetic; no ancillas are involved.

Segment bookkeeping pins the per-segment expansion rate at ln 2: the input
bounds gamma_i are scaled up (never down) so the working total satisfies
gamma_total * |dt| = ln 2, which makes the normalization s = 2 - tail hold
by construction.  The plan's ``T`` keeps the raw, unscaled dimensionless
time that fixed the segment count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divdiff import DdConfig, dd_exp, dd_exp_taylor_batch
from .pmr import GammaBounds, PmrHamiltonian, diagonal_energy, hopping_strength

__all__ = [
    "LN2",
    "SegmentPlan",
    "Path",
    "PathCoefficient",
    "WorkBudgetExceededError",
    "series_tail",
    "truncation_order",
    "plan_segments",
    "path_coefficient",
    "apply_diagonal",
    "apply_uod_truncated",
    "uod_matrix",
    "evolve",
]

LN2 = math.log(2.0)
DEFAULT_WORK_BUDGET = 1 << 28
_MATRIX_REUSE_ENTRIES = 1 << 24
_EVAL_CHUNK_ROWS = 1 << 20


class WorkBudgetExceededError(RuntimeError):
    """Path enumeration would exceed the configured work budget."""

    def __init__(self, product: int, budget: int, detail: str):
        super().__init__(
            f"path work M^Q * 2^N = {detail} = {product} exceeds budget {budget}"
        )
        self.product = product
        self.budget = budget


def series_tail(order: int, x: float = LN2) -> float:
    """Upper bound on sum_{q > order} x^q / q! with a geometric remainder cap."""
    if x == 0.0:
        return 0.0
    term = 1.0
    for k in range(1, order + 2):
        term *= x / k  # x^{order+1} / (order+1)!
    terms = []
    k = order + 1
    total = 0.0
    while True:
        terms.append(term)
        total += term
        k += 1
        term *= x / k
        if k + 1 > x and term / (1.0 - x / (k + 1)) <= 1e-17 * total:
            terms.append(term / (1.0 - x / (k + 1)))
            break
        if k > order + 500:
            terms.append(2.0 * term)
            break
    return math.fsum(terms)


def truncation_order(epsilon_per_segment: float, x: float = LN2) -> int:
    """Smallest Q with sum_{q > Q} x^q/q! <= epsilon_per_segment."""
    order = 0
    while series_tail(order, x) > epsilon_per_segment:
        order += 1
        if order > 10_000:
            raise ValueError("per-segment tolerance too small to satisfy")
    return order


@dataclass(frozen=True)
class SegmentPlan:
    """Derived evolution parameters for one run.

    ``gamma_total`` is the working (scaled) bound with
    gamma_total * |delta_t| = ln 2 for nontrivial plans; ``T`` is the raw
    dimensionless time |t| * sum_i gamma_i of the supplied bounds;
    ``gamma_scale`` maps supplied per-term bounds to working ones.
    """

    t_total: float
    epsilon: float
    gamma_total: float
    T: float
    r: int
    delta_t: float
    Q: int
    tail_bound: float
    s: float
    gamma_scale: float = 1.0
    diagonal_only: bool = False

    def working_gamma(self, g: GammaBounds) -> np.ndarray:
        return self.gamma_scale * np.asarray(g.gamma, dtype=float)


def plan_segments(
    h: PmrHamiltonian,
    g: GammaBounds,
    t: float,
    epsilon: float,
    q_override: int | None = None,
) -> SegmentPlan:
    """Choose r, dt and the truncation order Q for target error epsilon.

    Q is the smallest order whose ln(2)-tail is at most epsilon / r.  A zero
    time, an empty off-diagonal part or all-zero bounds give the trivial
    diagonal-only plan (r = 1, Q = 0).
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if len(g.gamma) != h.m:
        raise ValueError(f"got {len(g.gamma)} bounds for M={h.m} terms")
    T = abs(t) * g.gamma_total
    if t == 0.0 or h.m == 0 or g.gamma_total == 0.0:
        return SegmentPlan(
            t_total=t, epsilon=epsilon, gamma_total=g.gamma_total, T=T,
            r=1, delta_t=t, Q=0, tail_bound=0.0, s=1.0,
            gamma_scale=1.0, diagonal_only=True,
        )
    r = max(1, math.ceil(T / LN2 - 1e-12))
    delta_t = t / r
    order = truncation_order(epsilon / r) if q_override is None else int(q_override)
    tail = series_tail(order)
    partial, term = [1.0], 1.0
    for k in range(1, order + 1):
        term *= LN2 / k
        partial.append(term)
    s = math.fsum(partial)
    scale = LN2 / (g.gamma_total * abs(delta_t))
    return SegmentPlan(
        t_total=t, epsilon=epsilon, gamma_total=g.gamma_total * scale, T=T,
        r=r, delta_t=delta_t, Q=order, tail_bound=tail, s=s,
        gamma_scale=scale, diagonal_only=False,
    )


@dataclass(frozen=True)
class Path:
    """Flip-term index sequence (0-based) applied left to right."""

    indices: tuple[int, ...]

    @property
    def q(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class PathCoefficient:
    """alpha includes the segment's diagonal phase e^{-i dt E_z}; the
    pipeline deposits beta * gamma_path * |dt|^q / q! and leaves that phase
    to the separate diagonal pass."""

    alpha: complex
    beta: complex
    chi: float
    phi: float


def path_states(h: PmrHamiltonian, z: int, path: Path) -> list[int]:
    """Basis states z_1, ..., z_q visited after each flip."""
    states = []
    cur = z
    for i in path.indices:
        cur ^= h.terms[i][1].x_mask
        states.append(cur)
    return states


def path_coefficient(
    h: PmrHamiltonian,
    g: GammaBounds,
    plan: SegmentPlan,
    z: int,
    path: Path,
    config: DdConfig | None = None,
) -> PathCoefficient:
    """Coefficient of one flip path starting from basis state z."""
    q = path.q
    if q > plan.Q:
        raise ValueError(f"path length {q} exceeds plan order Q={plan.Q}")
    e_z = diagonal_energy(h, z)
    states = path_states(h, z, path)
    inputs = [0.0] + [diagonal_energy(h, s) - e_z for s in states]
    dd = dd_exp(inputs, plan.delta_t, config)
    dprod = 1.0 + 0.0j
    for i, s in zip(path.indices, states):
        dprod *= hopping_strength(h, i, s)
    working = plan.working_gamma(g)
    gam_path = float(np.prod(working[list(path.indices)])) if q else 1.0
    weight = gam_path * abs(plan.delta_t) ** q / math.factorial(q)
    if weight == 0.0:
        if abs(dprod) > 0.0:
            raise ValueError("zero bound on a path with nonzero hopping product")
        beta = 0j
    else:
        beta = dd * dprod / weight
    mag = abs(beta)
    chi = float(np.angle(beta)) if mag > 0.0 else 0.0
    phi = float(np.arccos(min(mag, 1.0)))
    alpha = np.exp(-1j * plan.delta_t * e_z) * dd * dprod
    return PathCoefficient(alpha=complex(alpha), beta=complex(beta), chi=chi, phi=phi)


def apply_diagonal(h: PmrHamiltonian, state: np.ndarray, delta_t: float) -> np.ndarray:
    """Multiply each amplitude by e^{-i dt E_z}; exactly norm-preserving."""
    state = np.asarray(state, dtype=complex)
    if state.shape != (1 << h.n_qubits,):
        raise ValueError("state length must be 2^N")
    return state * np.exp(-1j * delta_t * h.diagonal_values())


def _check_budget(h: PmrHamiltonian, plan: SegmentPlan, budget: int) -> None:
    product = h.m ** plan.Q * (1 << h.n_qubits)
    if product > budget:
        raise WorkBudgetExceededError(
            product, budget, f"{h.m}^{plan.Q} * 2^{h.n_qubits}"
        )


def _batch_dd(seqs: np.ndarray, delta_t: float, config: DdConfig) -> np.ndarray:
    if config.method == "taylor":
        return dd_exp_taylor_batch(seqs, delta_t, config.series_tol)
    return np.array([dd_exp(row, delta_t, config) for row in seqs], dtype=complex)


def _neumaier_add(acc: np.ndarray, comp: np.ndarray, term: np.ndarray) -> None:
    s = acc + term
    big = np.abs(s) >= np.abs(term)
    comp += np.where(big, (acc - s) + term, (term - s) + acc)
    acc[:] = s


def _bincount_complex(idx: np.ndarray, values: np.ndarray, size: int) -> np.ndarray:
    """Deterministic scatter-add of complex values into a length-``size`` array."""
    return np.bincount(idx, weights=values.real, minlength=size) + 1j * np.bincount(
        idx, weights=values.imag, minlength=size
    )


def _series_order(amp: float, tol: float) -> int:
    """Number of correction degrees so the A^n/n! tail drops below tol."""
    n_max, bound = 0, 1.0
    budget = int(10 * (amp + 20)) + 64
    while True:
        n_max += 1
        bound *= amp / n_max
        if n_max + 2 > amp and bound * (amp / (n_max + 1)) / (1 - amp / (n_max + 2)) <= tol:
            return n_max
        if n_max > budget:
            raise ValueError(f"series order diverges (|t|*spread ~ {amp:.3g})")


def _uod_paths(
    h: PmrHamiltonian,
    plan: SegmentPlan,
    sources: np.ndarray,
    weights: np.ndarray | None,
    config: DdConfig,
    work_budget: int,
):
    """Shared path-enumeration engine.

    With ``weights`` (source amplitudes) the result is the output state;
    with ``weights=None`` it is the dense off-diagonal segment matrix over
    the given source columns.  Paths extend breadth-first, term index
    ascending, and per-level deposits are merged with compensated
    accumulation, so outputs are reproducible.

    For the default taylor evaluator the divided differences are computed
    incrementally: every path carries the profile of complete homogeneous
    symmetric polynomials of its energy differences, which one more flip
    extends in O(n_max) work.  The leading zero input of each path does not
    enter the profile (h_n is unchanged by a zero variable).
    """
    _check_budget(h, plan, work_budget)
    dim = 1 << h.n_qubits
    n_src = len(sources)
    matrix_mode = weights is None
    size = dim * dim if matrix_mode else dim
    acc = np.zeros(size, dtype=complex)
    comp = np.zeros(size, dtype=complex)
    if matrix_mode:
        acc[sources * dim + sources] = 1.0  # empty path
    else:
        acc[sources] = weights  # empty path
    if plan.Q == 0 or h.m == 0 or n_src == 0:
        return acc.reshape((dim, dim)) if matrix_mode else acc

    energies = h.diagonal_values()
    d_tab = np.array([h.term_values(i) for i in range(h.m)])
    masks = h.x_masks().astype(np.int32)
    sources = sources.astype(np.int32)
    e_src = energies[sources]
    dt = plan.delta_t
    fast = config.method == "taylor"
    if fast:
        spread = float(energies.max() - energies.min()) if dim > 1 else 0.0
        amp = abs(dt) * spread
        n_max = _series_order(amp, config.series_tol) if amp > 0.0 else 1
        scan = np.zeros((1, n_src, n_max + 1), dtype=float)
        scan[:, :, 0] = 1.0
    else:
        seq = np.zeros((1, n_src, 1), dtype=float)

    cum = np.zeros(1, dtype=np.int32)
    dprod = np.ones((1, n_src), dtype=complex)
    for q in range(1, plan.Q + 1):
        cum_new = np.bitwise_xor.outer(cum, masks).reshape(-1)
        term_new = np.tile(np.arange(h.m), len(cum))
        dest = np.bitwise_xor.outer(cum_new, sources)
        delta_e = energies[dest] - e_src[None, :]
        dprod_new = np.repeat(dprod, h.m, axis=0)
        dprod_new *= d_tab[term_new[:, None], dest]

        live = np.flatnonzero(np.any(dprod_new != 0, axis=1))
        if len(live) == 0:
            break
        cum_new, dest = cum_new[live], dest[live]
        delta_e, dprod_new = delta_e[live], dprod_new[live]
        nt = len(cum_new)

        if fast:
            scan_new = scan[live // h.m].copy()
            for n in range(1, n_max + 1):
                scan_new[:, :, n] += delta_e * scan_new[:, :, n - 1]
            dd_re = np.zeros((nt, n_src))
            dd_im = np.zeros((nt, n_src))
            pref = 1.0 + 0.0j
            for k in range(1, q + 1):
                pref *= (-1j * dt) / k
            for n in range(n_max + 1):
                if pref.real != 0.0:
                    dd_re += pref.real * scan_new[:, :, n]
                if pref.imag != 0.0:
                    dd_im += pref.imag * scan_new[:, :, n]
                pref *= (-1j * dt) / (q + n + 1)
            coeff_full = (dd_re + 1j * dd_im) * dprod_new
            scan = scan_new
        else:
            seq_new = np.empty((nt, n_src, q + 1), dtype=float)
            seq_new[:, :, :q] = np.repeat(seq, h.m, axis=0)[live]
            seq_new[:, :, q] = delta_e
            coeff_full = _batch_dd(
                seq_new.reshape(nt * n_src, q + 1), dt, config
            ).reshape(nt, n_src)
            coeff_full *= dprod_new
            seq = seq_new

        flat_rows = nt * n_src
        coeff_flat = coeff_full.reshape(flat_rows)
        dest_flat = dest.reshape(flat_rows)
        level = np.zeros(size, dtype=complex)
        for lo in range(0, flat_rows, _EVAL_CHUNK_ROWS):
            hi = min(lo + _EVAL_CHUNK_ROWS, flat_rows)
            col_pos = np.arange(lo, hi) % n_src
            if matrix_mode:
                flat_idx = dest_flat[lo:hi].astype(np.int64) * dim + sources[col_pos]
                level += _bincount_complex(flat_idx, coeff_flat[lo:hi], size)
            else:
                level += _bincount_complex(
                    dest_flat[lo:hi], coeff_flat[lo:hi] * weights[col_pos], size
                )
        _neumaier_add(acc, comp, level)
        cum, dprod = cum_new, dprod_new
    out = acc + comp
    return out.reshape((dim, dim)) if matrix_mode else out


def apply_uod_truncated(
    h: PmrHamiltonian,
    g: GammaBounds,
    plan: SegmentPlan,
    state: np.ndarray,
    config: DdConfig | None = None,
    work_budget: int = DEFAULT_WORK_BUDGET,
) -> np.ndarray:
    """Apply the truncated off-diagonal segment factor to a state vector."""
    if len(g.gamma) != h.m:
        raise ValueError(f"got {len(g.gamma)} bounds for M={h.m} terms")
    state = np.asarray(state, dtype=complex)
    if state.shape != (1 << h.n_qubits,):
        raise ValueError("state length must be 2^N")
    sources = np.flatnonzero(state)
    return _uod_paths(
        h, plan, sources, state[sources], config or DdConfig(), work_budget
    )


def uod_matrix(
    h: PmrHamiltonian,
    g: GammaBounds,
    plan: SegmentPlan,
    config: DdConfig | None = None,
    work_budget: int = DEFAULT_WORK_BUDGET,
) -> np.ndarray:
    """Dense matrix of the truncated off-diagonal segment factor (small N)."""
    if len(g.gamma) != h.m:
        raise ValueError(f"got {len(g.gamma)} bounds for M={h.m} terms")
    dim = 1 << h.n_qubits
    if dim * dim > _MATRIX_REUSE_ENTRIES:
        raise ValueError("dense segment matrix limited to small N")
    sources = np.arange(dim, dtype=np.int64)
    return _uod_paths(h, plan, sources, None, config or DdConfig(), work_budget)


def evolve(
    h: PmrHamiltonian,
    g: GammaBounds,
    state: np.ndarray,
    t: float,
    epsilon: float,
    config: DdConfig | None = None,
    work_budget: int = DEFAULT_WORK_BUDGET,
    q_override: int | None = None,
) -> np.ndarray:
    """Run r segments of diagonal phase followed by the truncated U_od.

    Diagonal-only Hamiltonians evolve exactly in one shot.  When the dense
    segment matrix is affordable and reused across several segments it is
    built once; otherwise each segment re-enumerates paths matrix-free.
    """
    state = np.asarray(state, dtype=complex)
    plan = plan_segments(h, g, t, epsilon, q_override=q_override)
    if plan.diagonal_only:
        return apply_diagonal(h, state, t)
    cfg = config or DdConfig()
    dim = 1 << h.n_qubits
    if plan.r > 1 and dim * dim <= _MATRIX_REUSE_ENTRIES:
        mat = _uod_paths(
            h, plan, np.arange(dim, dtype=np.int64), None, cfg, work_budget
        )
        phases = np.exp(-1j * plan.delta_t * h.diagonal_values())
        for _ in range(plan.r):
            state = mat @ (phases * state)
        return state
    for _ in range(plan.r):
        state = apply_diagonal(h, state, plan.delta_t)
        state = apply_uod_truncated(h, g, plan, state, cfg, work_budget)
    return state
