"""Command-line front end.

Subcommands: evolve (truncated-series emulation), lcu (ancilla-level
emulation), divdiff (four-method evaluation table), resources (cost-formula
instantiation), compare (model comparison table) and models (write a model
Hamiltonian file).  All artifacts are CSV (or a rendered human table of the
same fields); identical seeded invocations produce byte-identical output.
Timing goes to stderr so it never perturbs the artifacts.

Exit codes: 0 success, 2 input error, 3 work/memory budget exceeded,
4 numerical check failure (with --check).
"""

from __future__ import annotations

import argparse
import math
import sys
import time

import numpy as np

from .divdiff import (
    DdConfig,
    RepeatedInputsError,
    auto_doubling_depth,
    dd_exp_leibniz,
    dd_exp_naive,
    dd_exp_pyramid,
    dd_exp_taylor,
    small_tau_error,
)
from .lcu import CompositeBudgetError, LcuConfig, evolve_lcu
from .models import MODEL_NAMES, build_named_model
from .oracle import DenseOracle
from .pmr import (
    HamiltonianParseError,
    format_hamiltonian,
    gamma_bounds,
    parse_hamiltonian_file,
    pauli_to_pmr,
    pmr_to_pauli_strings,
)
from .resources import comparison_csv, comparison_row, resource_table
from .series import WorkBudgetExceededError, evolve, plan_segments

__all__ = ["main", "build_parser"]

DENSE_ORACLE_LIMIT = 12


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _render(header: list[str], rows: list[list], fmt: str) -> str:
    if fmt == "csv":
        lines = [",".join(header)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        return "\n".join(lines) + "\n"
    widths = [
        max(len(h), *(len(_fmt(row[i])) for row in rows)) if rows else len(h)
        for i, h in enumerate(header)
    ]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    for row in rows:
        lines.append(
            "  ".join(_fmt(v).ljust(w) for v, w in zip(row, widths)).rstrip()
        )
    return "\n".join(lines) + "\n"


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _initial_state(arg: str, n_qubits: int, seed: int) -> np.ndarray:
    dim = 1 << n_qubits
    if arg == "random":
        rng = np.random.default_rng(seed)
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        return psi / np.linalg.norm(psi)
    z = int(arg)
    if not 0 <= z < dim:
        raise ValueError(f"basis index {z} out of range for N={n_qubits}")
    psi = np.zeros(dim, dtype=complex)
    psi[z] = 1.0
    return psi


def _load_hamiltonian(path: str):
    strings = parse_hamiltonian_file(path)
    return pauli_to_pmr(strings)


def cmd_evolve(args) -> int:
    h = _load_hamiltonian(args.hamiltonian)
    g = gamma_bounds(h, args.gamma_mode)
    psi = _initial_state(args.initial, h.n_qubits, args.seed)
    plan = plan_segments(h, g, args.t, args.epsilon)
    config = DdConfig(method=args.dd_method)
    start = time.perf_counter()
    out = evolve(h, g, psi, args.t, args.epsilon, config=config)
    elapsed = time.perf_counter() - start
    error = None
    if h.n_qubits <= DENSE_ORACLE_LIMIT:
        error = float(np.linalg.norm(out - DenseOracle(h).evolve(psi, args.t)))
    header = [
        "hamiltonian", "N", "M", "t", "epsilon", "T", "r", "Q", "delta_t",
        "tail_bound", "s", "gamma_mode", "dd_method", "seed", "error_2norm",
    ]
    row = [
        args.hamiltonian, h.n_qubits, h.m, args.t, args.epsilon, plan.T,
        plan.r, plan.Q, plan.delta_t, plan.tail_bound, plan.s,
        args.gamma_mode, args.dd_method, args.seed, error,
    ]
    _emit(_render(header, [row], args.format), args.output)
    print(f"elapsed_s={elapsed:.3f}", file=sys.stderr)
    if args.check and error is not None and error > args.epsilon:
        print(f"check failed: error {error:.3e} > epsilon", file=sys.stderr)
        return 4
    return 0


def cmd_lcu(args) -> int:
    h = _load_hamiltonian(args.hamiltonian)
    g = gamma_bounds(h, args.gamma_mode)
    psi = _initial_state(args.initial, h.n_qubits, args.seed)
    plan = plan_segments(h, g, args.t, args.epsilon)
    config = LcuConfig(phase_bits=args.phase_bits, dd=DdConfig(method=args.dd_method))
    start = time.perf_counter()
    out, diags = evolve_lcu(h, g, psi, args.t, args.epsilon, config)
    elapsed = time.perf_counter() - start
    error = None
    if h.n_qubits <= DENSE_ORACLE_LIMIT:
        error = float(np.linalg.norm(out - DenseOracle(h).evolve(psi, args.t)))
    quant_error = None
    if args.phase_bits is not None:
        exact_out, _ = evolve_lcu(
            h, g, psi, args.t, args.epsilon, LcuConfig(dd=DdConfig(method=args.dd_method))
        )
        quant_error = float(np.linalg.norm(out - exact_out))
    header = [
        "hamiltonian", "N", "M", "segment", "t", "epsilon", "T", "r", "Q", "s",
        "anc_zero_weight", "discarded_weight", "trace_residual",
        "phase_bits", "error_2norm", "quantization_error",
    ]
    rows = []
    for idx, d in enumerate(diags, start=1):
        rows.append(
            [
                args.hamiltonian, h.n_qubits, h.m, idx, args.t, args.epsilon,
                plan.T, plan.r, plan.Q, d.s, d.anc_zero_weight,
                d.discarded_weight, d.trace_residual, args.phase_bits, None, None,
            ]
        )
    rows.append(
        [
            args.hamiltonian, h.n_qubits, h.m, "total", args.t, args.epsilon,
            plan.T, plan.r, plan.Q, plan.s if diags else 1.0, None, None, None,
            args.phase_bits, error, quant_error,
        ]
    )
    _emit(_render(header, rows, args.format), args.output)
    print(f"elapsed_s={elapsed:.3f}", file=sys.stderr)
    if args.check and error is not None and error > 10 * args.epsilon:
        print(f"check failed: error {error:.3e} > 10 epsilon", file=sys.stderr)
        return 4
    return 0


def cmd_divdiff(args) -> int:
    values = [float(v) for v in args.inputs]
    t = args.t
    q = len(values) - 1
    reference = dd_exp_taylor(values, t)
    results: list[tuple[str, complex | None]] = [("taylor", reference)]
    try:
        results.append(("naive", dd_exp_naive(values, t)))
    except RepeatedInputsError:
        results.append(("naive", None))
    results.append(("pyramid", dd_exp_pyramid(values, t) if t != 0 else None))
    results.append(("leibniz", dd_exp_leibniz(values, t)))
    header = ["quantity", "value_re", "value_im", "abs_dev_vs_taylor"]
    rows = []
    for name, val in results:
        if val is None:
            rows.append([name, "n/a", "n/a", "n/a"])
        else:
            rows.append([name, val.real, val.imag, abs(val - reference)])
    bound = abs(t) ** q / math.factorial(q)
    rows.append(["magnitude", abs(reference), None, None])
    rows.append(["magnitude_bound", bound, None, None])
    depth = auto_doubling_depth(values, t)
    seed_dt = t / (1 << depth)
    rows.append(["doubling_depth", depth, None, None])
    rows.append(["seed_error", small_tau_error(values, seed_dt), None, None])
    rows.append(["seed_error_bound", seed_dt ** 2, None, None])
    _emit(_render(header, rows, args.format), args.output)
    return 0


def _resource_rows(h, g, record, t, epsilon):
    plan = plan_segments(h, g, t, epsilon)
    est = resource_table(
        h, g, plan, t_prime=record.T_prime if record is not None else None
    )
    rows = [
        ["N", h.n_qubits],
        ["M", h.m],
        ["T", plan.T],
        ["T_prime", est.T_prime],
        ["Q", est.Q],
        ["r", est.r],
        ["lcu_unitary_count", est.lcu_unitary_count],
        ["qubit_cost", est.qubit_cost],
        ["gates_per_segment", est.gate_cost_segment],
        ["gates_total", est.gates_total],
    ]
    if record is not None:
        rows.insert(0, ["model", record.model])
        rows.append(["T_quoted_convention", record.T])
        rows.append(["T_exact_maxnorm", record.T_maxnorm])
        rows.append(["lcu_count_quoted", record.lcu_count_quoted])
        rows.append(["taylor_L", record.taylor_terms])
        if record.notes:
            rows.append(["notes", record.notes.replace(",", ";")])
    for name, (gates, qubits) in est.rows.items():
        rows.append([f"gates_{name}", gates])
        rows.append([f"qubits_{name}", qubits])
    return rows


def cmd_resources(args) -> int:
    if args.model:
        h, record = build_named_model(args.model, args.N, t=args.t)
        g = gamma_bounds(h, args.gamma_mode)
    else:
        if not args.hamiltonian:
            raise ValueError("resources needs --model or --hamiltonian")
        h = _load_hamiltonian(args.hamiltonian)
        record = None
        g = gamma_bounds(h, args.gamma_mode)
    rows = _resource_rows(h, g, record, args.t, args.epsilon)
    _emit(_render(["quantity", "value"], rows, args.format), args.output)
    return 0


def cmd_compare(args) -> int:
    names = MODEL_NAMES if args.model == "all" else (args.model,)
    rows = []
    for name in names:
        h, record = build_named_model(name, args.N, t=args.t)
        g = gamma_bounds(h, args.gamma_mode)
        rows.append(comparison_row(h, record, g, args.t, args.epsilon))
    text = comparison_csv(rows)
    if args.format == "human":
        header = text.strip().split("\n")[0].split(",")
        body = [line.split(",") for line in text.strip().split("\n")[1:]]
        text = _render(header, body, "human")
    _emit(text, args.output)
    return 0


def cmd_models(args) -> int:
    h, record = build_named_model(args.model, args.N, t=args.t)
    strings = pmr_to_pauli_strings(h)
    text = (
        f"# model={record.model} N_qubits={h.n_qubits} M={h.m} "
        f"T={_fmt(record.T)} T_prime={_fmt(record.T_prime)}\n"
        + format_hamiltonian(strings)
    )
    _emit(text, args.output)
    return 0


def _apply_config_file(argv: list[str]) -> list[str]:
    """Expand a --config key=value file into flags after the subcommand.

    Flags given explicitly on the command line take precedence because they
    appear later.  Booleans (e.g. ``check = true``) become bare flags.
    """
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError:
        raise HamiltonianParseError("--config needs a path", 0) from None
    flags: list[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise HamiltonianParseError(f"expected key=value, got {line!r}", lineno)
            key, value = (part.strip() for part in line.split("=", 1))
            flag = "--" + key.replace("_", "-")
            if value.lower() in ("true", "false"):
                if value.lower() == "true":
                    flags.append(flag)
            else:
                flags += [flag, value]
    rest = argv[:idx] + argv[idx + 2 :]
    if not rest:
        return flags
    return rest[:1] + flags + rest[1:]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmrsim",
        description="Desk-scale emulation of off-diagonal-series Hamiltonian dynamics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, hamiltonian=False, model=False):
        p.add_argument("--t", type=float, default=1.0, help="evolution time")
        p.add_argument("--epsilon", type=float, default=1e-6, help="target error")
        p.add_argument("--dd-method", dest="dd_method", default="taylor",
                       choices=("taylor", "naive", "pyramid", "leibniz"))
        p.add_argument("--gamma-mode", dest="gamma_mode", default="exact",
                       choices=("exact", "sum_abs"))
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--output", default=None, help="artifact path (default stdout)")
        p.add_argument("--format", default="csv", choices=("csv", "human"))
        p.add_argument("--check", action="store_true",
                       help="exit 4 if the dense-oracle error exceeds tolerance")
        if hamiltonian:
            p.add_argument("--hamiltonian", required=False, default=None,
                           help="Hamiltonian text file")
            p.add_argument("--initial", default="random",
                           help="'random' or a basis index")
        if model:
            p.add_argument("--model", default=None)
            p.add_argument("--N", type=int, default=4, help="model size parameter")

    p = sub.add_parser("evolve", help="truncated-series evolution")
    common(p, hamiltonian=True)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("lcu", help="ancilla-level LCU + amplification evolution")
    common(p, hamiltonian=True)
    p.add_argument("--phase-bits", dest="phase_bits", type=int, default=None)
    p.set_defaults(func=cmd_lcu)

    p = sub.add_parser("divdiff", help="divided-difference method table")
    p.add_argument("inputs", nargs="+", help="real energy inputs")
    common(p)
    p.set_defaults(func=cmd_divdiff)

    p = sub.add_parser("resources", help="gate/qubit cost table")
    common(p, hamiltonian=True, model=True)
    p.set_defaults(func=cmd_resources)

    p = sub.add_parser("compare", help="method comparison table")
    common(p, model=True)
    p.set_defaults(func=cmd_compare)
    p.set_defaults(model="all")

    p = sub.add_parser("models", help="write a model Hamiltonian file")
    common(p, model=True)
    p.set_defaults(func=cmd_models)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except HamiltonianParseError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (WorkBudgetExceededError, CompositeBudgetError) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
