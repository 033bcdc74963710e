"""Bit vectors with rank/select, directly addressable codes, and zigzag mapping.

These are the low-level storage primitives everything else is built on: the
bit vector backs the spatial trees and the group-delimiter bitmaps, the DAC
sequences back random access to rule metadata, and the zigzag mapping lets
signed displacements ride inside unsigned encodings.
"""

from __future__ import annotations

from bisect import bisect_left
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import NotFoundError, RangeError

_WORD_BITS = 64
_WORD_MASK = (1 << 64) - 1
_SUPER_WORDS = 8  # superblock = 512 bits


def _select_in_word(word: int, j: int) -> int:
    """0-based index of the j-th (1-based) set bit of a 64-bit word."""
    idx = 0
    while True:
        byte = word & 0xFF
        c = byte.bit_count()
        if j <= c:
            while True:
                if byte & 1:
                    j -= 1
                    if j == 0:
                        return idx
                byte >>= 1
                idx += 1
        j -= c
        word >>= 8
        idx += 8


class BitVector:
    """Immutable bit sequence with constant-time rank and fast select.

    Positions follow the 1-based prefix convention used throughout the
    package: rank1(p) counts ones among the first p bits (p in [0, len]),
    select1(j) returns the 1-based position of the j-th one. Raw bit access
    via bv[i] is 0-based.

    The rank directory is two-level: absolute counts per 512-bit superblock
    plus 16-bit relative counts per 64-bit word; select binary-searches the
    superblock samples and scans at most one superblock.
    """

    __slots__ = ("_words", "_length", "_super", "_block", "_ones")

    def __init__(self, words: list[int], length: int):
        if length > len(words) * _WORD_BITS:
            raise ValueError("length exceeds provided words")
        self._words = words
        self._length = length
        self._build_directories()

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitVector":
        arr = np.fromiter((1 if b else 0 for b in bits), dtype=np.uint8)
        packed = np.packbits(arr, bitorder="little").tobytes()
        pad = (-len(packed)) % 8
        packed += b"\x00" * pad
        words = np.frombuffer(packed, dtype="<u8").tolist()
        return cls(words, int(arr.size))

    @classmethod
    def from_words(cls, words: Sequence[int], length: int) -> "BitVector":
        return cls(list(words), length)

    def _build_directories(self) -> None:
        nwords = (self._length + _WORD_BITS - 1) // _WORD_BITS
        # Zero out any stray padding bits past the logical length.
        if nwords and self._length % _WORD_BITS:
            keep = (1 << (self._length % _WORD_BITS)) - 1
            self._words[nwords - 1] &= keep
        del self._words[nwords:]
        nsupers = (nwords + _SUPER_WORDS - 1) // _SUPER_WORDS
        supers = [0] * (nsupers + 1)
        blocks = [0] * (nwords + 1)
        total = 0
        for w in range(nwords):
            if w % _SUPER_WORDS == 0:
                supers[w // _SUPER_WORDS] = total
            blocks[w] = total - supers[w // _SUPER_WORDS]
            total += self._words[w].bit_count()
        supers[nsupers] = total
        # Sentinel block entry so rank at a word boundary needs no branch.
        if nwords % _SUPER_WORDS:
            blocks[nwords] = total - supers[nwords // _SUPER_WORDS]
        self._super = supers
        self._block = blocks
        self._ones = total

    def __len__(self) -> int:
        return self._length

    def __getitem__(self, i: int) -> int:
        if i < 0 or i >= self._length:
            raise RangeError(f"bit index {i} out of range [0, {self._length})")
        return (self._words[i >> 6] >> (i & 63)) & 1

    def __iter__(self) -> Iterator[int]:
        for i in range(self._length):
            yield (self._words[i >> 6] >> (i & 63)) & 1

    @property
    def words(self) -> list[int]:
        return self._words

    @property
    def ones(self) -> int:
        return self._ones

    @property
    def zeros(self) -> int:
        return self._length - self._ones

    def rank1(self, p: int) -> int:
        """Number of 1 bits among the first p bits."""
        if p < 0 or p > self._length:
            raise RangeError(f"rank position {p} out of range [0, {self._length}]")
        w, r = divmod(p, _WORD_BITS)
        cnt = self._super[w // _SUPER_WORDS] + self._block[w]
        if r:
            cnt += (self._words[w] & ((1 << r) - 1)).bit_count()
        return cnt

    def rank0(self, p: int) -> int:
        """Number of 0 bits among the first p bits."""
        return p - self.rank1(p)

    def rank(self, bit: int, p: int) -> int:
        return self.rank1(p) if bit else self.rank0(p)

    def select1(self, j: int) -> int:
        """1-based position of the j-th 1 bit (j is 1-based)."""
        if j < 1 or j > self._ones:
            raise NotFoundError(f"select1({j}): vector has {self._ones} ones")
        sb = bisect_left(self._super, j) - 1
        rem = j - self._super[sb]
        w = sb * _SUPER_WORDS
        while True:
            c = self._words[w].bit_count()
            if rem <= c:
                return w * _WORD_BITS + _select_in_word(self._words[w], rem) + 1
            rem -= c
            w += 1

    def select0(self, j: int) -> int:
        """1-based position of the j-th 0 bit (j is 1-based)."""
        if j < 1 or j > self.zeros:
            raise NotFoundError(f"select0({j}): vector has {self.zeros} zeros")
        # Superblock search over zero counts derived from the one counts.
        lo, hi = 0, len(self._super) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            zeros_before = mid * _SUPER_WORDS * _WORD_BITS - self._super[mid]
            if zeros_before < j:
                lo = mid + 1
            else:
                hi = mid
        sb = lo - 1
        rem = j - (sb * _SUPER_WORDS * _WORD_BITS - self._super[sb])
        w = sb * _SUPER_WORDS
        while True:
            inv = ~self._words[w] & _WORD_MASK
            c = inv.bit_count()
            if rem <= c:
                return w * _WORD_BITS + _select_in_word(inv, rem) + 1
            rem -= c
            w += 1

    def select(self, bit: int, j: int) -> int:
        return self.select1(j) if bit else self.select0(j)


class DacSequence:
    """Random-access sequence of naturals, chunked into fixed-width pieces.

    Each value is split into chunks of `chunk_width` bits starting from the
    least significant end; level 0 holds one chunk per value and each level
    carries a continuation bitmap whose rank steers random access into the
    next level. A value v occupies max(1, ceil(bitlen(v) / chunk_width))
    levels.
    """

    __slots__ = ("chunk_width", "count", "_levels", "_flags")

    def __init__(self, chunk_width: int, count: int,
                 levels: list[list[int]], flags: list[BitVector]):
        self.chunk_width = chunk_width
        self.count = count
        self._levels = levels
        self._flags = flags

    @classmethod
    def encode(cls, values: Iterable[int], chunk_width: int = 8) -> "DacSequence":
        if chunk_width < 1:
            raise ValueError("chunk width must be >= 1")
        mask = (1 << chunk_width) - 1
        pending = list(values)
        count = len(pending)
        levels: list[list[int]] = []
        flags: list[BitVector] = []
        while True:
            chunks: list[int] = []
            fl: list[int] = []
            nxt: list[int] = []
            for v in pending:
                if v < 0:
                    raise ValueError("DAC stores naturals only")
                chunks.append(v & mask)
                rest = v >> chunk_width
                if rest:
                    fl.append(1)
                    nxt.append(rest)
                else:
                    fl.append(0)
            levels.append(chunks)
            flags.append(BitVector.from_bits(fl))
            if not nxt:
                break
            pending = nxt
        return cls(chunk_width, count, levels, flags)

    def __len__(self) -> int:
        return self.count

    def access(self, i: int) -> int:
        """The i-th source integer (0-based)."""
        if i < 0 or i >= self.count:
            raise RangeError(f"DAC index {i} out of range [0, {self.count})")
        v = 0
        shift = 0
        idx = i
        for lvl in range(len(self._levels)):
            v |= self._levels[lvl][idx] << shift
            flags = self._flags[lvl]
            if not flags[idx]:
                return v
            idx = flags.rank1(idx)
            shift += self.chunk_width
        return v

    def to_list(self) -> list[int]:
        """Sequential decode of the whole sequence, independent of rank."""
        out: list[int] = []
        cursors = [0] * len(self._levels)
        for i in range(self.count):
            v = 0
            shift = 0
            lvl = 0
            idx = i
            while True:
                v |= self._levels[lvl][idx] << shift
                if not self._flags[lvl][idx]:
                    break
                shift += self.chunk_width
                lvl += 1
                idx = cursors[lvl]
                cursors[lvl] += 1
            out.append(v)
        return out

    @property
    def num_levels(self) -> int:
        return len(self._levels)

    @property
    def levels(self) -> list[list[int]]:
        return self._levels

    @property
    def flags(self) -> list[BitVector]:
        return self._flags


def zigzag(x: int) -> int:
    """Map an integer to a natural: 0, -1, 1, -2, 2 ... -> 0, 1, 2, 3, 4 ..."""
    return (x << 1) if x >= 0 else (-(x << 1) - 1)


def unzigzag(n: int) -> int:
    """Inverse of :func:`zigzag`."""
    return (n >> 1) if (n & 1) == 0 else -((n + 1) >> 1)


def pack_fixed(values: Sequence[int], width: int) -> bytes:
    """Concatenate `width`-bit values LSB-first into a byte string."""
    buf = 0
    nbits = 0
    out = bytearray()
    mask = (1 << width) - 1
    for v in values:
        buf |= (v & mask) << nbits
        nbits += width
        while nbits >= 8:
            out.append(buf & 0xFF)
            buf >>= 8
            nbits -= 8
    if nbits:
        out.append(buf & 0xFF)
    return bytes(out)


def unpack_fixed(data: bytes, width: int, count: int) -> list[int]:
    """Inverse of :func:`pack_fixed`."""
    out = []
    buf = 0
    nbits = 0
    pos = 0
    mask = (1 << width) - 1
    for _ in range(count):
        while nbits < width:
            buf |= data[pos] << nbits
            pos += 1
            nbits += 8
        out.append(buf & mask)
        buf >>= width
        nbits -= width
    return out
