"""Compiler wrapping: plan invocations, hash inputs, merge, embed.

The wrapper runs the underlying compiler command unmodified and, only
after it succeeds, computes the output's dependency fingerprint:
digests of every source file and header the compilation consumed, plus
the union of fingerprints already embedded in linked objects,
archives, and shared libraries. The result is written into each
produced binary as its ``.abom`` section.

A build the compiler accepts is never failed by the wrapper; inputs
lacking fingerprints only produce warnings. Embedding problems are the
one exception and surface as a distinct exit status.

Environment:

* ``ABOM_DEPFLAGS`` overrides the dependency-scan flag set (default
  ``-M``, so system headers are included).
* ``ABOM_QUIET`` (nonempty) silences warning lines.
"""

from __future__ import annotations

import os
import re
import shlex
import subprocess
import sys
import tempfile
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .bloom import FilterChain
from .digest import hash_file
from .errors import AbomError
from .objfile import (
    BinaryKind,
    ar_members,
    detect,
    extract_abom,
    embed_abom,
    sidecar_path,
)
from . import wire

SOURCE_EXTS = {
    ".c", ".h", ".i", ".ii",
    ".cc", ".cp", ".cxx", ".cpp", ".c++", ".C", ".H",
    ".hh", ".hpp", ".hxx", ".h++", ".tcc",
    ".m", ".mi", ".mm",
    ".s", ".S", ".sx", ".asm",
}
OBJECT_EXTS = {".o", ".obj"}
ARCHIVE_EXTS = {".a"}
_SHLIB_RE = re.compile(r"\.so(\.\d+)*$")

# flags that consume the following token
_ARG_FLAGS = {
    "-o", "-I", "-L", "-l", "-D", "-U", "-x", "-T", "-u", "-z",
    "-include", "-imacros", "-isystem", "-iquote", "-idirafter", "-isysroot",
    "-MF", "-MT", "-MQ", "-aux-info", "--param", "-soname",
    "-Xlinker", "-Xpreprocessor", "-Xassembler",
}
# flags that mean no linkable binary is produced
_PASSTHROUGH_FLAGS = {
    "-E", "-M", "-MM", "-###", "--version", "--help", "-dumpversion",
    "-dumpmachine", "-dumpspecs", "-print-search-dirs", "-print-prog-name",
}
# dep-scan keeps preprocessing-relevant flags only
_SCAN_PAIR_FLAGS = {
    "-I", "-D", "-U", "-include", "-imacros", "-isystem", "-iquote",
    "-idirafter", "-isysroot",
}
_SCAN_PREFIXES = ("-I", "-D", "-U", "-std=")
_SCAN_BARE_FLAGS = {"-nostdinc", "-nostdinc++", "-undef", "-pthread"}

_WARN_MISSING = "missing-abom"
_WARN_UNRESOLVED = "unresolved-library"
_WARN_DEPSCAN = "dep-scan-failed"


class Mode(Enum):
    COMPILE = "compile"
    LINK = "link"
    COMPILE_AND_LINK = "compile-and-link"
    PASSTHROUGH = "passthrough"


@dataclass
class AbomWarning:
    """One non-fatal problem found while assembling a fingerprint."""

    path: str
    reason: str  # missing-abom | unresolved-library | dep-scan-failed

    def __str__(self) -> str:
        return f"abom: warning: {self.path}: {self.reason}"


@dataclass
class InvocationPlan:
    """What a compiler command line consumes and produces."""

    compiler_argv: list[str]
    mode: Mode
    outputs: list[str] = field(default_factory=list)
    source_inputs: list[str] = field(default_factory=list)
    link_inputs: list[str] = field(default_factory=list)
    lib_names: list[str] = field(default_factory=list)
    lib_dirs: list[str] = field(default_factory=list)


def _expand_response_files(tokens: list[str], depth: int = 0) -> list[str]:
    """Splice ``@file`` tokens in place of their shell-split contents."""
    if depth > 8:
        return tokens
    out: list[str] = []
    for tok in tokens:
        if tok.startswith("@") and len(tok) > 1:
            try:
                text = Path(tok[1:]).read_text()
            except OSError:
                out.append(tok)
                continue
            out.extend(_expand_response_files(shlex.split(text), depth + 1))
        else:
            out.append(tok)
    return out


def plan(argv: list[str]) -> InvocationPlan:
    """Classify a compiler command line.

    Anything that produces no linkable binary (preprocessing,
    dependency listings, version queries, assembly output, reading from
    stdin, or a command with no recognizable inputs) becomes
    ``PASSTHROUGH``: the command still runs, nothing is embedded.
    """
    if not argv:
        raise ValueError("empty command line")
    args = _expand_response_files(list(argv[1:]))
    plan_ = InvocationPlan(compiler_argv=[argv[0]] + args, mode=Mode.PASSTHROUGH)

    compile_only = False
    passthrough = False
    o_target = None
    i = 0
    while i < len(args):
        tok = args[i]
        if tok == "-":
            passthrough = True
        elif tok in ("-c",):
            compile_only = True
        elif tok in ("-S",):
            passthrough = True  # assembly text cannot carry a binary section
        elif tok in _PASSTHROUGH_FLAGS or tok.startswith("-print-"):
            passthrough = True
        elif tok == "-o" and i + 1 < len(args):
            o_target = args[i + 1]
            i += 2
            continue
        elif tok.startswith("-o") and len(tok) > 2:
            o_target = tok[2:]
        elif tok == "-l" and i + 1 < len(args):
            plan_.lib_names.append(args[i + 1])
            i += 2
            continue
        elif tok.startswith("-l") and len(tok) > 2:
            plan_.lib_names.append(tok[2:])
        elif tok == "-L" and i + 1 < len(args):
            plan_.lib_dirs.append(args[i + 1])
            i += 2
            continue
        elif tok.startswith("-L") and len(tok) > 2:
            plan_.lib_dirs.append(tok[2:])
        elif tok in _ARG_FLAGS and i + 1 < len(args):
            i += 2
            continue
        elif not tok.startswith("-"):
            ext = os.path.splitext(tok)[1]
            if ext in SOURCE_EXTS:
                plan_.source_inputs.append(tok)
            elif ext in OBJECT_EXTS or ext in ARCHIVE_EXTS or _SHLIB_RE.search(tok):
                plan_.link_inputs.append(tok)
            # anything else is left for the compiler to judge
        i += 1

    if passthrough or (not plan_.source_inputs and not plan_.link_inputs):
        return plan_

    if compile_only:
        plan_.mode = Mode.COMPILE
        if o_target:
            plan_.outputs = [o_target]
        else:
            plan_.outputs = [
                os.path.splitext(os.path.basename(s))[0] + ".o"
                for s in plan_.source_inputs
            ]
    elif plan_.source_inputs:
        plan_.mode = Mode.COMPILE_AND_LINK
        plan_.outputs = [o_target or "a.out"]
    else:
        plan_.mode = Mode.LINK
        plan_.outputs = [o_target or "a.out"]
    return plan_


def parse_make_deps(text: str) -> list[str]:
    """Extract the prerequisite paths from a make-style dependency rule.

    Handles line continuations and make's escaping of spaces, hashes,
    and dollar signs in paths.
    """
    text = text.replace("\\\r\n", " ").replace("\\\n", " ")
    _, _, rest = text.partition(":")
    paths: list[str] = []
    token: list[str] = []
    i = 0
    while i < len(rest):
        ch = rest[i]
        if ch == "\\" and i + 1 < len(rest) and rest[i + 1] in (" ", "#", "\\"):
            token.append(rest[i + 1])
            i += 2
            continue
        if ch == "$" and i + 1 < len(rest) and rest[i + 1] == "$":
            token.append("$")
            i += 2
            continue
        if ch.isspace():
            if token:
                paths.append("".join(token))
                token = []
        else:
            token.append(ch)
        i += 1
    if token:
        paths.append("".join(token))
    return paths


def _dep_scan_argv(plan_: InvocationPlan, source: str) -> list[str]:
    """Dependency-listing command for one source file."""
    keep = [plan_.compiler_argv[0]]
    args = plan_.compiler_argv[1:]
    i = 0
    while i < len(args):
        tok = args[i]
        if tok in _SCAN_PAIR_FLAGS and i + 1 < len(args):
            keep += [tok, args[i + 1]]
            i += 2
            continue
        if tok in _SCAN_BARE_FLAGS or (
            tok.startswith(_SCAN_PREFIXES) and tok not in ("-I", "-D", "-U")
        ):
            keep.append(tok)
        i += 1
    dep_flags = shlex.split(os.environ.get("ABOM_DEPFLAGS", "-M"))
    return keep + dep_flags + [source]


def enumerate_sources(
    plan_: InvocationPlan,
) -> tuple[list[str], list[AbomWarning]]:
    """Close each source over its includes via the compiler's own scanner.

    Every file the preprocessor touches counts as an input, system
    headers included. A failed scan falls back to the bare source file
    and leaves a warning. Paths come back canonicalized, deduplicated,
    and sorted.
    """
    warnings: list[AbomWarning] = []
    found: set[str] = set()
    for source in plan_.source_inputs:
        argv = _dep_scan_argv(plan_, source)
        try:
            proc = subprocess.run(argv, capture_output=True, text=True)
        except OSError:
            proc = None
        if proc is None or proc.returncode != 0:
            warnings.append(AbomWarning(source, _WARN_DEPSCAN))
            found.add(os.path.realpath(source))
            continue
        deps = parse_make_deps(proc.stdout)
        found.add(os.path.realpath(source))
        for dep in deps:
            found.add(os.path.realpath(dep))
    return sorted(found), warnings


def _default_lib_dirs() -> list[str]:
    import glob

    candidates = (
        ["/usr/local/lib"]
        + sorted(glob.glob("/usr/lib/*-linux-gnu"))
        + sorted(glob.glob("/lib/*-linux-gnu"))
        + ["/usr/lib64", "/lib64", "/usr/lib", "/lib"]
    )
    return [d for d in candidates if os.path.isdir(d)]


def _resolve_lib(name: str, extra_dirs: list[str]) -> str | None:
    for directory in list(extra_dirs) + _default_lib_dirs():
        for pattern in (f"lib{name}.so", f"lib{name}.a"):
            candidate = os.path.join(directory, pattern)
            if os.path.isfile(candidate):
                return candidate
    return None


def _chain_from_elf(data: bytes) -> FilterChain | None:
    if detect(data) is not BinaryKind.ELF64:
        return None
    try:
        section = extract_abom(data)
    except AbomError:
        return None
    if section is None:
        return None
    try:
        return wire.parse(section).chain
    except AbomError:
        return None


def _collect_archive(
    path: str, chains: list[FilterChain], warnings: list[AbomWarning]
) -> None:
    side = sidecar_path(path)
    try:
        if side.is_file() and side.stat().st_mtime > os.stat(path).st_mtime:
            chains.append(wire.parse(side.read_bytes()).chain)
            return
    except (OSError, AbomError):
        pass  # stale or unusable sidecar: fall back to the members themselves
    try:
        data = Path(path).read_bytes()
        missing = False
        for _, body in ar_members(data):
            if detect(body) is not BinaryKind.ELF64:
                continue
            chain = _chain_from_elf(body)
            if chain is None:
                missing = True
            else:
                chains.append(chain)
        if missing:
            warnings.append(AbomWarning(path, _WARN_MISSING))
    except (OSError, AbomError):
        warnings.append(AbomWarning(path, _WARN_MISSING))


def collect_upstream(
    plan_: InvocationPlan,
) -> tuple[list[FilterChain], list[AbomWarning]]:
    """Gather embedded fingerprints from everything being linked in.

    Objects and shared libraries are read directly; archives prefer a
    fresh sidecar file and otherwise fall back to per-member
    extraction, warning once per archive with uncovered members.
    Libraries named by ``-l`` resolve through ``-L`` paths then the
    system default directories. Nothing here is fatal: every gap is a
    warning and the build continues.
    """
    chains: list[FilterChain] = []
    warnings: list[AbomWarning] = []

    def from_file(path: str) -> None:
        if os.path.splitext(path)[1] in ARCHIVE_EXTS:
            _collect_archive(path, chains, warnings)
            return
        try:
            data = Path(path).read_bytes()
        except OSError:
            warnings.append(AbomWarning(path, _WARN_MISSING))
            return
        chain = _chain_from_elf(data)
        if chain is None:
            warnings.append(AbomWarning(path, _WARN_MISSING))
        else:
            chains.append(chain)

    for path in plan_.link_inputs:
        from_file(path)
    for name in plan_.lib_names:
        resolved = _resolve_lib(name, plan_.lib_dirs)
        if resolved is None:
            warnings.append(AbomWarning(f"-l{name}", _WARN_UNRESOLVED))
        else:
            from_file(resolved)
    return chains, warnings


def build_abom(
    sources: list[str], upstream: list[FilterChain]
) -> wire.AbomDocument:
    """Assemble a document from source paths and upstream chains.

    Sources are hashed in canonical-path order so identical trees yield
    identical chains regardless of command-line order; upstream chains
    are merged afterwards in input order.
    """
    chain = FilterChain()
    for path in sorted(os.path.realpath(p) for p in sources):
        chain.insert(hash_file(path))
    for up in upstream:
        chain = chain.union(up)
    return wire.AbomDocument(chain=chain)


def _embed_into_file(path: str, blob: bytes) -> None:
    target = Path(path)
    original = target.read_bytes()
    rewritten = embed_abom(original, blob)
    mode = target.stat().st_mode
    fd, tmp_name = tempfile.mkstemp(dir=str(target.parent) or ".", prefix=".abom-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(rewritten)
        os.chmod(tmp_name, mode)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def wrap(argv: list[str]) -> int:
    """Run a compiler command and fingerprint its outputs.

    The compiler's exit status passes through untouched on failure and
    for passthrough invocations. On success one document is built per
    invocation and embedded into every produced output; warnings go to
    stderr. Embedding or hashing failures leave the compiler's
    artifacts in place and return 3.
    """
    plan_ = plan(argv)
    try:
        proc = subprocess.run(argv)  # the untouched command line
    except FileNotFoundError:
        print(f"abom: {argv[0]}: command not found", file=sys.stderr)
        return 127
    if proc.returncode != 0:
        return proc.returncode
    if plan_.mode is Mode.PASSTHROUGH:
        return 0

    warnings: list[AbomWarning] = []
    sources: list[str] = []
    upstream: list[FilterChain] = []
    if plan_.mode in (Mode.COMPILE, Mode.COMPILE_AND_LINK):
        sources, dep_warnings = enumerate_sources(plan_)
        warnings += dep_warnings
    if plan_.mode in (Mode.LINK, Mode.COMPILE_AND_LINK):
        upstream, link_warnings = collect_upstream(plan_)
        warnings += link_warnings

    if not os.environ.get("ABOM_QUIET"):
        for warning in warnings:
            print(warning, file=sys.stderr)

    try:
        blob = wire.serialize(build_abom(sources, upstream))
    except (OSError, AbomError) as exc:
        print(f"abom: error: building fingerprint failed: {exc}", file=sys.stderr)
        return 3

    status = 0
    for output in plan_.outputs:
        if not os.path.isfile(output):
            continue  # e.g. -o /dev/null probes
        try:
            _embed_into_file(output, blob)
        except (OSError, AbomError) as exc:
            print(f"abom: error: {output}: {exc}", file=sys.stderr)
            status = 3
    return status
