"""Command-line front ends.

Five commands, also reachable as subcommands of the single ``abom``
binary:

* ``abom <compiler> [args...]`` — run a compiler and fingerprint its
  outputs,
* ``abom-hash <file>...`` — print 36-bit content digests,
* ``abom-check <binary> <digest>`` — query a binary for one digest,
* ``abom-inspect <binary>`` — show a binary's fingerprint layout,
* ``abom-params`` — dump the parameter-space sweep as CSV.

Exit codes are stable: 0 positive result, 1 negative result, 2 usage or
input error, 3 embedding failure. Results go to stdout, diagnostics to
stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import AbomError, HexDigestError

_USAGE = """\
usage:
  abom <compiler> [compiler args...]   wrap a compile/link command
  abom hash <file>...                  print file digests
  abom check <binary> <hex-digest>     query a binary for a digest
  abom inspect <binary>                describe a binary's fingerprint
  abom params [flags]                  dump the parameter sweep as CSV
"""

EXIT_USAGE = 2
EXIT_EMBED = 3


def cmd_hash(args: list[str]) -> int:
    from .digest import hash_file, to_hex

    if not args:
        print("usage: abom-hash <file>...", file=sys.stderr)
        return EXIT_USAGE
    status = 0
    single = len(args) == 1
    for path in args:
        try:
            digest = hash_file(path)
        except OSError as exc:
            print(f"abom-hash: {path}: {exc.strerror or exc}", file=sys.stderr)
            status = 1
            continue
        print(to_hex(digest) if single else f"{to_hex(digest)}  {path}")
    return status


def cmd_check(args: list[str]) -> int:
    from .digest import from_hex
    from .objfile import extract_abom
    from . import wire

    if len(args) != 2:
        print("usage: abom-check <binary> <hex-digest>", file=sys.stderr)
        return EXIT_USAGE
    binary_path, hex_digest = args
    try:
        digest = from_hex(hex_digest)
    except HexDigestError as exc:
        print(f"abom-check: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        data = Path(binary_path).read_bytes()
    except OSError as exc:
        print(f"abom-check: {binary_path}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        section = extract_abom(data)
        if section is None:
            print(f"abom-check: {binary_path}: no ABOM found", file=sys.stderr)
            return EXIT_USAGE
        document = wire.parse(section)
    except AbomError as exc:
        print(f"abom-check: {binary_path}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if digest in document:
        print("Dependency Present")
        return 0
    print("Dependency Absent")
    return 1


def cmd_inspect(args: list[str]) -> int:
    from .objfile import extract_abom
    from . import wire

    if len(args) != 1:
        print("usage: abom-inspect <binary>", file=sys.stderr)
        return EXIT_USAGE
    binary_path = args[0]
    try:
        data = Path(binary_path).read_bytes()
    except OSError as exc:
        print(f"abom-inspect: {binary_path}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        section = extract_abom(data)
        if section is None:
            print(f"abom-inspect: {binary_path}: no ABOM found", file=sys.stderr)
            return EXIT_USAGE
        document = wire.parse(section)
    except AbomError as exc:
        print(f"abom-inspect: {binary_path}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    p1_q = int.from_bytes(section[7:11], "little")
    print(f"version: {document.version}")
    print(f"filters: {len(document.chain)}")
    print(f"model p(1): {p1_q / 0xFFFFFFFF:.9f}")
    print(f"payload bytes: {len(section) - wire.HEADER_LEN}")
    print(f"section bytes: {len(section)}")
    for index, filt in enumerate(document.chain):
        print(
            f"filter {index}: ones={filt.ones} "
            f"estimated_items={filt.estimate_n():.2f}"
        )
    return 0


def cmd_params(args: list[str]) -> int:
    from .params import sweep

    parser = argparse.ArgumentParser(
        prog="abom-params",
        description="Dump the filter parameter sweep as CSV.",
    )
    parser.add_argument("--max-log2-m", type=int, default=24,
                        help="largest log2 of the bit-array length (default 24)")
    parser.add_argument("--max-k", type=int, default=6,
                        help="largest hash-slice count (default 6)")
    parser.add_argument("--min-n", type=int, default=1000,
                        help="smallest acceptable item capacity (default 1000)")
    parser.add_argument("--max-f-log2", type=int, default=-14,
                        help="log2 of the false-positive bound (default -14)")
    parser.add_argument("--top", type=int, default=None,
                        help="emit only the first N rows by compressed size")
    try:
        ns = parser.parse_args(args)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    if ns.max_f_log2 >= 0:
        print("abom-params: --max-f-log2 must be negative", file=sys.stderr)
        return EXIT_USAGE
    if ns.max_log2_m < 1 or ns.max_k < 1 or ns.min_n < 0:
        print("abom-params: bounds must be positive", file=sys.stderr)
        return EXIT_USAGE
    if ns.top is not None and ns.top < 1:
        print("abom-params: --top must be positive", file=sys.stderr)
        return EXIT_USAGE

    rows = sweep(
        max_log2_m=ns.max_log2_m,
        max_k=ns.max_k,
        min_n=ns.min_n,
        f_bound=2.0 ** ns.max_f_log2,
    )
    if ns.top is not None:
        rows = rows[: ns.top]
    print("m_log2,k,n_max,f,z_bytes,bytes_per_item")
    for point in rows:
        print(
            f"{point.m.bit_length() - 1},{point.k},{point.n_max},"
            f"{point.f:.6e},{point.z_bytes},{point.bytes_per_item:.3f}"
        )
    return 0


def cmd_abom(args: list[str]) -> int:
    from .builder import wrap

    if not args:
        print(_USAGE, file=sys.stderr)
        return EXIT_USAGE
    return wrap(args)


_SUBCOMMANDS = {
    "hash": cmd_hash,
    "check": cmd_check,
    "inspect": cmd_inspect,
    "params": cmd_params,
}


def main(argv: list[str] | None = None) -> int:
    """Dispatch ``abom`` invocations.

    A first argument naming a subcommand routes there; anything else is
    taken as a compiler command to wrap.
    """
    args = list(sys.argv[1:] if argv is None else argv)
    if not args:
        print(_USAGE, file=sys.stderr)
        return EXIT_USAGE
    if args[0] in ("-h", "--help"):
        print(_USAGE)
        return 0
    handler = _SUBCOMMANDS.get(args[0])
    if handler is not None:
        return handler(args[1:])
    return cmd_abom(args)


def entry_abom() -> None:
    raise SystemExit(main())


def entry_hash() -> None:
    raise SystemExit(cmd_hash(sys.argv[1:]))


def entry_check() -> None:
    raise SystemExit(cmd_check(sys.argv[1:]))


def entry_inspect() -> None:
    raise SystemExit(cmd_inspect(sys.argv[1:]))


def entry_params() -> None:
    raise SystemExit(cmd_params(sys.argv[1:]))
