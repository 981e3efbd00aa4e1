"""``bench`` command line: run scenarios, replay traces, compare kernels.

Exit codes: 0 on success, 2 when an embedded invariant check fails
(:class:`AssertionFailed`), 1 on any other error. With a fixed ``--seed``
the emitted CSV and trace files are byte-identical across runs.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Any

from ..config import ClusterConfig
from ..errors import AssertionFailed
from .replay import replay_file
from .scenarios import COLUMNS, SCENARIOS, run_scenario

__all__ = ["main"]

_FLOAT_COLS = {"arrival_interval_s", "latency_s", "predicted_T_d"}

# generic CLI knobs -> per-scenario keyword arguments
_KNOB_MAP: dict[str, dict[str, str]] = {
    "rtt": {"object_bytes": "object_bytes", "trials": "trials"},
    "broadcast": {
        "nodes": "receivers",
        "object_bytes": "object_bytes",
        "trials": "trials",
    },
    "gather": {
        "nodes": "sources",
        "object_bytes": "object_bytes",
        "trials": "trials",
    },
    "reduce": {
        "nodes": "n_sources",
        "object_bytes": "object_bytes",
        "degree": "degree",
        "trials": "trials",
    },
    "allreduce": {
        "nodes": "n_sources",
        "object_bytes": "object_bytes",
        "degree": "degree",
        "trials": "trials",
    },
    "staggered": {
        "interval": "interval_s",
        "object_bytes": "object_bytes",
        "nodes": "n_values",
    },
    "fault_broadcast": {
        "nodes": "receivers",
        "object_bytes": "object_bytes",
        "trials": "trials",
    },
    "fault_reduce": {
        "nodes": "m_sources",
        "object_bytes": "object_bytes",
        "trials": "trials",
    },
    "ablation_d": {"nodes": "n_values"},
}

_TUPLE_KNOBS = {"n_values"}


def _format_cell(col: str, value: Any) -> str:
    if col in _FLOAT_COLS:
        return f"{float(value):.9f}"
    return str(value)


def _write_csv(path: str, rows: list[dict[str, Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(c, row[c]) for c in COLUMNS) + "\n")


def _dump_trace(path: str, tracers: list) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, tracer in enumerate(tracers):
            if i:
                fh.write(
                    json.dumps(
                        {"t": 0.0, "kind": "trial_boundary"},
                        sort_keys=True,
                        separators=(",", ":"),
                    )
                    + "\n"
                )
            for ev in tracer.events:
                fh.write(json.dumps(ev, sort_keys=True, separators=(",", ":")) + "\n")


def _cmd_run(args: argparse.Namespace) -> int:
    knobs: dict[str, Any] = {}
    mapping = _KNOB_MAP[args.scenario]
    for cli_name, kw in mapping.items():
        value = getattr(args, cli_name, None)
        if value is None:
            continue
        knobs[kw] = (value,) if kw in _TUPLE_KNOBS else value

    t0 = time.monotonic()
    if args.backend == "tcp":
        if args.trace:
            print("error: --trace is only recorded by the sim backend", file=sys.stderr)
            return 1
        from .tcprun import run_tcp_scenario

        rows = run_tcp_scenario(args.scenario, args.seed, **knobs)
    else:
        base = ClusterConfig.from_yaml(args.config) if args.config else None
        tracers: list | None = [] if args.trace else None
        level = 2 if args.trace else 1
        rows = run_scenario(
            args.scenario,
            args.seed,
            base,
            level=level,
            tracer_out=tracers,
            **knobs,
        )
        if args.trace:
            _dump_trace(args.trace, tracers or [])
    _write_csv(args.out, rows)
    wall = time.monotonic() - t0
    print(
        f"{args.scenario}: {len(rows)} row(s) -> {args.out}"
        + (f", trace -> {args.trace}" if args.trace else "")
        + f" ({wall:.1f}s)"
    )
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    report = replay_file(args.trace)
    print(report.summary())
    return 0


def _cmd_kernels(args: argparse.Namespace) -> int:
    import numpy as np

    from .. import kernels

    rng = np.random.default_rng(7)
    results: list[tuple[str, str, float]] = []
    for backend in kernels.available_backends():
        for dtype_name, np_dtype in (("f32", np.float32), ("i64", np.int64)):
            code = kernels.DTYPES[dtype_name]
            if np_dtype is np.float32:
                dst0 = rng.standard_normal(args.elems, dtype=np.float32)
                src = rng.standard_normal(args.elems, dtype=np.float32)
            else:
                dst0 = rng.integers(-1000, 1000, size=args.elems, dtype=np.int64)
                src = rng.integers(-1000, 1000, size=args.elems, dtype=np.int64)
            src_b = src.tobytes()
            best = float("inf")
            for _ in range(args.repeat):
                dst = bytearray(dst0.tobytes())
                t0 = time.perf_counter()
                kernels.combine_with_backend(
                    backend, dst, src_b, kernels.OP_SUM, code
                )
                best = min(best, time.perf_counter() - t0)
            results.append((backend, dtype_name, best))
    print(f"active backend: {kernels.active_backend()}")
    print(f"{'backend':8s} {'dtype':5s} {'best_s':>12s} {'GB/s':>8s}")
    for backend, dtype_name, best in results:
        nbytes = args.elems * kernels.dtype_itemsize(kernels.DTYPES[dtype_name])
        rate = (2 * nbytes / best) / 1e9 if best > 0 else float("inf")
        print(f"{backend:8s} {dtype_name:5s} {best:12.6f} {rate:8.2f}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="collective-communication benchmarks over the simulated "
        "or TCP backend",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and write a CSV")
    run.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    run.add_argument(
        "--config",
        help="YAML cluster config supplying the network profile and store "
        "tunables; the node count itself stays scenario-derived",
    )
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", required=True, help="CSV output path")
    run.add_argument(
        "--trace",
        help="also dump a JSONL event trace (sim backend only; forces "
        "verbose tracing)",
    )
    run.add_argument("--backend", choices=("sim", "tcp"), default="sim")
    run.add_argument(
        "--nodes",
        type=int,
        help="participant count (receivers, sources, or swept n)",
    )
    run.add_argument("--object-bytes", dest="object_bytes", type=int)
    run.add_argument(
        "--interval", type=float, help="arrival spacing for staggered runs"
    )
    run.add_argument("--trials", type=int)
    run.add_argument("--degree", type=int, help="force the tree degree")

    rep = sub.add_parser("replay", help="check invariants over a JSONL trace")
    rep.add_argument("--trace", required=True)

    ker = sub.add_parser(
        "kernels", help="compare compiled and numpy combine backends"
    )
    ker.add_argument("--elems", type=int, default=1 << 22)
    ker.add_argument("--repeat", type=int, default=5)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "replay": _cmd_replay, "kernels": _cmd_kernels}
    try:
        return handlers[args.command](args)
    except AssertionFailed as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
