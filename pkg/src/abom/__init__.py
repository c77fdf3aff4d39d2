"""Dependency fingerprints embedded in binaries at build time.

Every source file a build consumes is identified by a 36-bit SHAKE128
digest and recorded in fixed-parameter compressed Bloom filters. The
filters travel inside the produced binaries as a dedicated section,
merge transitively at link time, and answer one question cheaply: was
this exact file among the inputs, anywhere up the build graph?
"""

from .bloom import (
    FILTER_BITS,
    HASH_SLICES,
    MAX_FILTERS,
    MAX_FPR,
    MAX_ITEMS,
    PARAMS,
    BloomFilter,
    FilterChain,
    FilterParams,
    estimate_items,
    union_filters,
)
from .builder import (
    AbomWarning,
    InvocationPlan,
    Mode,
    build_abom,
    collect_upstream,
    enumerate_sources,
    plan,
    wrap,
)
from .coder import ArithModel, decode, encode, model_from_bits
from .digest import (
    Digest36,
    IndexPair,
    from_hex,
    hash_bytes,
    hash_file,
    indices,
    to_hex,
)
from .errors import (
    AbomError,
    ArchiveError,
    CapacityError,
    CorruptPayloadError,
    ElfStructureError,
    HexDigestError,
    MalformedError,
    NotAnAbomError,
    TruncatedError,
    UnsupportedFormatError,
    UnsupportedVersionError,
    WireError,
)
from .objfile import (
    BinaryKind,
    ar_members,
    detect,
    embed_abom,
    extract_abom,
    sidecar_path,
)
from .params import ParamPoint, cumulative_fpr, entropy_size_bytes, fpr, max_n, sweep
from .wire import AbomDocument, parse, serialize

__version__ = "0.1.0"

__all__ = [
    "AbomDocument",
    "AbomError",
    "AbomWarning",
    "ArchiveError",
    "ArithModel",
    "BinaryKind",
    "BloomFilter",
    "CapacityError",
    "CorruptPayloadError",
    "Digest36",
    "ElfStructureError",
    "FILTER_BITS",
    "FilterChain",
    "FilterParams",
    "HASH_SLICES",
    "HexDigestError",
    "IndexPair",
    "InvocationPlan",
    "MalformedError",
    "MAX_FILTERS",
    "MAX_FPR",
    "MAX_ITEMS",
    "Mode",
    "NotAnAbomError",
    "PARAMS",
    "ParamPoint",
    "TruncatedError",
    "UnsupportedFormatError",
    "UnsupportedVersionError",
    "WireError",
    "ar_members",
    "build_abom",
    "collect_upstream",
    "cumulative_fpr",
    "decode",
    "detect",
    "embed_abom",
    "encode",
    "entropy_size_bytes",
    "enumerate_sources",
    "estimate_items",
    "extract_abom",
    "fpr",
    "from_hex",
    "hash_bytes",
    "hash_file",
    "indices",
    "max_n",
    "model_from_bits",
    "parse",
    "plan",
    "serialize",
    "sidecar_path",
    "sweep",
    "to_hex",
    "union_filters",
    "wrap",
]
