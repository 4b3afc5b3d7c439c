"""Command-line entry points: generate, inspect, verify.

Exit codes: 0 on success, 1 when verification ran but records failed,
2 for usage, data-layout, or I/O problems.  Failures print one categorized
line on stderr of the form ``error: <category>: <message>``.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .basis import BoundaryCondition
from .dataset import (
    MANIFEST_FILENAME,
    OPERATOR_TAGS,
    DatasetError,
    generate_dataset,
    load_arrays,
    read_manifest,
    sha256_of_file,
)
from .fields import FieldSpec
from .grid import Grid
from .verifier import verify_dataset

_U64_MAX = (1 << 64) - 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synthpde",
        description="Generate, inspect, and verify synthetic elliptic-PDE training datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="sample fields, apply the operator, write a dataset")
    gen.add_argument("--op", required=True, choices=OPERATOR_TAGS, help="operator family")
    gen.add_argument("--bc", required=True, choices=[b.value for b in BoundaryCondition],
                     help="boundary condition of the sampled fields")
    gen.add_argument("--n", required=True, type=int, help="number of samples")
    gen.add_argument("--res", type=int, default=64,
                     help="points per side, boundary included (default 64)")
    gen.add_argument("--m-min", type=int, default=1, help="smallest truncation order (default 1)")
    gen.add_argument("--m-max", type=int, default=20, help="largest truncation order (default 20)")
    gen.add_argument("--seed", required=True, type=int, help="master seed (unsigned 64-bit)")
    gen.add_argument("--precision", type=int, choices=(32, 64), default=32,
                     help="element size of emitted arrays (default 32)")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--workers", type=int, default=1,
                     help="worker processes; output bytes do not depend on this (default 1)")
    gen.add_argument("--npy", action="store_true",
                     help="additionally emit .npy copies of every array")

    ins = sub.add_parser("inspect", help="print a dataset's manifest and array layout")
    ins.add_argument("manifest", help="path to manifest.json")
    ins.add_argument("--hashes", action="store_true", help="also print SHA-256 of each array file")

    ver = sub.add_parser("verify", help="finite-difference residual checks over a dataset")
    ver.add_argument("manifest", help="path to manifest.json")
    ver.add_argument("--refine", action="store_true",
                     help="measure a third, quarter-spacing refinement level")
    ver.add_argument("--report", help="write the JSON report here instead of stdout")
    ver.add_argument("--limit", type=int, help="check only the first K records")
    return parser


def _error_category(exc: BaseException) -> str:
    name = type(exc).__name__
    name = re.sub(r"Error$", "", name) or "error"
    kebab = re.sub(r"(?<!^)(?=[A-Z])", "-", name).lower()
    return {"value": "invalid-value", "os": "io", "key": "invalid-value"}.get(kebab, kebab)


def _cmd_generate(args) -> int:
    if not 0 <= args.seed <= _U64_MAX:
        raise ValueError(f"--seed must be in [0, 2^64), got {args.seed}")
    spec = FieldSpec(
        bc=BoundaryCondition(args.bc),
        min_modes=args.m_min,
        max_modes=args.m_max,
        master_seed=args.seed,
    )
    grid = Grid(args.res, includes_boundary=True)
    manifest = generate_dataset(
        spec,
        args.op,
        grid,
        args.n,
        args.out,
        dtype=f"float{args.precision}",
        workers=args.workers,
        npy_mirror=args.npy,
    )
    print(Path(args.out) / MANIFEST_FILENAME)
    return 0


def _cmd_inspect(args) -> int:
    manifest, arrays = load_arrays(args.manifest)
    base = Path(args.manifest).parent
    print(f"operator:       {manifest.operator}")
    print(f"bc:             {manifest.bc}")
    print(f"samples:        {manifest.n_samples}")
    boundary = "boundary included" if manifest.includes_boundary else "interior only"
    print(f"grid:           {manifest.points_per_side} points/side ({boundary})")
    print(f"mode range:     [{manifest.min_modes}, {manifest.max_modes}]")
    print(f"master seed:    {manifest.master_seed}")
    print(f"dtype:          {manifest.dtype}")
    print(f"created:        {manifest.created_at}")
    print(f"schema version: {manifest.version}")
    print("arrays:")
    for name, info in manifest.arrays.items():
        shape = "x".join(str(s) for s in info.shape)
        line = f"  {name:<14} {info.file:<20} {shape:<14} {info.dtype:<8} {info.nbytes} bytes"
        print(line)
        if args.hashes:
            print(f"  {'':<14} sha256 {sha256_of_file(base / info.file)}")
    mode_counts = arrays["modes"]
    print(f"mode counts:    min {int(mode_counts.min())}, max {int(mode_counts.max())}")
    return 0


def _cmd_verify(args) -> int:
    report = verify_dataset(args.manifest, refine=args.refine, limit=args.limit)
    text = json.dumps(report, indent=2)
    if args.report:
        Path(args.report).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    summary = report["summary"]
    if not summary["all_passed"]:
        failed = summary["records_checked"] - summary["records_passed"]
        print(
            f"error: verification-failed: {failed} of {summary['records_checked']} "
            "records failed residual checks",
            file=sys.stderr,
        )
        return 1
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "generate": _cmd_generate,
        "inspect": _cmd_inspect,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except (DatasetError, ValueError, OSError) as exc:
        print(f"error: {_error_category(exc)}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
