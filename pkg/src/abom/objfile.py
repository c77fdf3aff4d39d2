"""Binary container handling.

Detects executable formats by magic bytes, reads and writes the
``.abom`` section in ELF64 images, iterates ar archive members, and
names archive sidecar files.

Section rewriting is append-only: new section data, the grown name
table, and a rebuilt section header table all land after the last byte
of the original file, and only the ELF header's table offset and count
fields are patched in place. Program headers, load segments, and every
pre-existing section therefore keep their exact offsets and bytes, so
an executable stays runnable.
"""

from __future__ import annotations

import struct
from enum import Enum
from os import PathLike, fspath
from pathlib import Path
from typing import Iterator, Optional, Union

from . import wire
from .errors import ArchiveError, ElfStructureError, UnsupportedFormatError

ELF_SECTION_NAME = ".abom"
# Mach-O naming recognized for diagnostics; this tool never writes it.
MACHO_SECTION_NAME = "__ABOM,__abom"


class BinaryKind(Enum):
    ELF64 = "elf64"
    MACHO = "mach-o"
    PE = "pe"
    AR_ARCHIVE = "ar-archive"
    UNKNOWN = "unknown"


_ELF_MAGIC = b"\x7fELF"
_AR_MAGIC = b"!<arch>\n"
_MACHO_MAGICS = (
    bytes.fromhex("feedfacf"),
    bytes.fromhex("cffaedfe"),
    bytes.fromhex("cafebabe"),
)


def detect(data: bytes) -> BinaryKind:
    """Classify a byte sequence by its leading magic.

    Never raises; anything unrecognized (including short input and
    non-64-bit ELF classes) is ``UNKNOWN``.
    """
    if data[:4] == _ELF_MAGIC:
        if len(data) >= 5 and data[4] == 2:
            return BinaryKind.ELF64
        return BinaryKind.UNKNOWN
    if data[:8] == _AR_MAGIC:
        return BinaryKind.AR_ARCHIVE
    if data[:4] in _MACHO_MAGICS:
        return BinaryKind.MACHO
    if data[:2] == b"MZ":
        return BinaryKind.PE
    return BinaryKind.UNKNOWN


# ELF64 structures, little-endian.
_EHDR = struct.Struct("<16sHHIQQQIHHHHHH")
_SHDR = struct.Struct("<IIQQQQIIQQ")

_SHT_PROGBITS = 1
_SHT_STRTAB = 3
_SHT_NOBITS = 8
_SHN_XINDEX = 0xFFFF

# e_* field offsets patched during embedding
_OFF_SHOFF = 40
_OFF_SHENTSIZE = 58
_OFF_SHNUM = 60
_OFF_SHSTRNDX = 62

# section header tuple indices
_SH_NAME = 0
_SH_TYPE = 1
_SH_OFFSET = 4
_SH_SIZE = 5
_SH_LINK = 6


class _Elf64:
    """Bounds-checked read-only view of an ELF64 image."""

    def __init__(self, data: bytes):
        kind = detect(data)
        if kind is not BinaryKind.ELF64:
            raise UnsupportedFormatError(
                f"not an ELF64 binary (detected: {kind.value})"
            )
        if len(data) < _EHDR.size:
            raise ElfStructureError("file shorter than the ELF header")
        fields = _EHDR.unpack_from(data, 0)
        ident = fields[0]
        if ident[5] != 1:
            raise UnsupportedFormatError("only little-endian ELF64 is supported")
        self.data = data
        self.e_shoff = fields[6]
        self.e_shentsize = fields[11]
        self.e_shnum = fields[12]
        self.shstrndx = fields[13]
        self.sections: list[list[int]] = []
        if self.e_shoff == 0:
            return
        if self.e_shentsize != _SHDR.size:
            raise ElfStructureError(
                f"unexpected section header entry size {self.e_shentsize}"
            )
        if self.e_shoff + _SHDR.size > len(data):
            raise ElfStructureError("section header table offset out of bounds")
        count = self.e_shnum
        if count == 0:
            # extended numbering: the real count hides in entry 0
            count = _SHDR.unpack_from(data, self.e_shoff)[_SH_SIZE]
        if count == 0 or self.e_shoff + count * _SHDR.size > len(data):
            raise ElfStructureError("section header table extends past file end")
        self.sections = [
            list(_SHDR.unpack_from(data, self.e_shoff + i * _SHDR.size))
            for i in range(count)
        ]
        if self.shstrndx == _SHN_XINDEX:
            self.shstrndx = self.sections[0][_SH_LINK]

    def section_data(self, index: int) -> bytes:
        sh = self.sections[index]
        if sh[_SH_TYPE] == _SHT_NOBITS:
            return b""
        off, size = sh[_SH_OFFSET], sh[_SH_SIZE]
        if off + size > len(self.data):
            raise ElfStructureError(f"section {index} data out of bounds")
        return self.data[off : off + size]

    def shstrtab(self) -> bytes:
        if not 0 < self.shstrndx < len(self.sections):
            raise ElfStructureError("section name table index out of range")
        return self.section_data(self.shstrndx)

    def section_name(self, index: int) -> str:
        table = self.shstrtab()
        name_off = self.sections[index][_SH_NAME]
        if name_off >= len(table):
            raise ElfStructureError(f"section {index} name offset out of bounds")
        end = table.find(b"\x00", name_off)
        if end < 0:
            raise ElfStructureError("unterminated section name")
        return table[name_off:end].decode("latin-1")

    def find_section(self, name: str) -> Optional[int]:
        for i in range(1, len(self.sections)):
            if self.section_name(i) == name:
                return i
        return None


def extract_abom(binary: bytes) -> Optional[bytes]:
    """Return the exact bytes of the ``.abom`` section, if present."""
    elf = _Elf64(binary)
    if not elf.sections:
        return None
    index = elf.find_section(ELF_SECTION_NAME)
    if index is None:
        return None
    if elf.sections[index][_SH_TYPE] == _SHT_NOBITS:
        raise ElfStructureError(".abom section carries no file data")
    return elf.section_data(index)


def embed_abom(binary: bytes, abom: bytes) -> bytes:
    """Return a rewritten ELF64 image carrying ``abom`` as its ``.abom`` section.

    On first embed the section count grows by exactly one: the new
    ``.abom`` entry. The name table entry is redirected in place to a
    grown copy appended at the end, never moved. Re-embedding redirects
    the existing ``.abom`` header entry to the fresh data, leaving the
    old bytes as unreferenced padding.
    """
    wire.check_header(abom)
    elf = _Elf64(binary)
    sections = [list(sh) for sh in elf.sections]

    pieces = [binary]
    cursor = len(binary)

    abom_off = cursor
    pieces.append(abom)
    cursor += len(abom)

    if sections:
        existing = elf.find_section(ELF_SECTION_NAME)
        table = elf.shstrtab()
        if existing is not None:
            name_off = sections[existing][_SH_NAME]
        else:
            name_off = table.find(ELF_SECTION_NAME.encode() + b"\x00")
            if name_off < 0:
                # grow a copy of the name table and redirect its entry
                name_off = len(table)
                grown = table + ELF_SECTION_NAME.encode() + b"\x00"
                sections[elf.shstrndx][_SH_OFFSET] = cursor
                sections[elf.shstrndx][_SH_SIZE] = len(grown)
                pieces.append(grown)
                cursor += len(grown)
        entry = [name_off, _SHT_PROGBITS, 0, 0, abom_off, len(abom), 0, 0, 1, 0]
        if existing is not None:
            sections[existing] = entry
        else:
            sections.append(entry)
        shstrndx = elf.shstrndx
    else:
        # no section table at all: fabricate null + .abom + .shstrtab
        names = b"\x00.abom\x00.shstrtab\x00"
        names_off = cursor
        pieces.append(names)
        cursor += len(names)
        sections = [
            [0] * 10,
            [1, _SHT_PROGBITS, 0, 0, abom_off, len(abom), 0, 0, 1, 0],
            [7, _SHT_STRTAB, 0, 0, names_off, len(names), 0, 0, 1, 0],
        ]
        shstrndx = 2

    pad = -cursor % 8
    pieces.append(b"\x00" * pad)
    cursor += pad
    shoff = cursor

    count = len(sections)
    if count >= 0xFF00:
        # extended numbering: real values live in entry 0
        sections[0][_SH_SIZE] = count
        header_count = 0
    else:
        sections[0][_SH_SIZE] = elf.sections[0][_SH_SIZE] if elf.sections else 0
        header_count = count
    if shstrndx >= 0xFF00:
        sections[0][_SH_LINK] = shstrndx
        header_strndx = _SHN_XINDEX
    else:
        header_strndx = shstrndx
    pieces.append(b"".join(_SHDR.pack(*sh) for sh in sections))

    out = bytearray(b"".join(pieces))
    struct.pack_into("<Q", out, _OFF_SHOFF, shoff)
    struct.pack_into("<H", out, _OFF_SHENTSIZE, _SHDR.size)
    struct.pack_into("<H", out, _OFF_SHNUM, header_count)
    struct.pack_into("<H", out, _OFF_SHSTRNDX, header_strndx)
    return bytes(out)


def sidecar_path(archive_path: Union[str, PathLike]) -> Path:
    """The cache file conventionally shipped next to an archive.

    The archive's own name with the literal suffix ``.abom`` appended:
    ``libfoo.a`` maps to ``libfoo.a.abom``.
    """
    return Path(fspath(archive_path) + ".abom")


def ar_members(data: bytes) -> Iterator[tuple[str, bytes]]:
    """Yield (name, body) for each regular member of an ar archive.

    Understands the GNU long-name table and skips the symbol-table
    members. Malformed structure raises :class:`ArchiveError`.
    """
    if data[:8] != _AR_MAGIC:
        raise ArchiveError("not an ar archive")
    pos = 8
    longnames = b""
    while pos < len(data):
        if pos + 60 > len(data):
            raise ArchiveError("truncated member header")
        header = data[pos : pos + 60]
        if header[58:60] != b"\x60\x0a":
            raise ArchiveError("bad member header terminator")
        name = header[0:16].decode("latin-1").rstrip()
        try:
            size = int(header[48:58].decode("ascii").strip())
        except (UnicodeDecodeError, ValueError):
            raise ArchiveError("bad member size field") from None
        if size < 0 or pos + 60 + size > len(data):
            raise ArchiveError("member extends past archive end")
        body = data[pos + 60 : pos + 60 + size]
        pos += 60 + size + (size & 1)
        if name == "//":
            longnames = body
            continue
        if name in ("/", "/SYM64/"):
            continue
        if name.startswith("/") and name[1:].isdigit():
            off = int(name[1:])
            if off >= len(longnames):
                raise ArchiveError("long-name offset out of range")
            end = longnames.find(b"\n", off)
            raw = longnames[off : end if end >= 0 else len(longnames)]
            name = raw.decode("latin-1").rstrip("/")
        elif name.endswith("/"):
            name = name[:-1]
        yield name, body
