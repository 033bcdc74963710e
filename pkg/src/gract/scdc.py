"""(s,c)-dense byte codes for integer log streams.

A model-free byte codec: byte values below s are stoppers, the remaining
c = 256 - s are continuers. Values are laid out densely by codeword length,
so smaller integers get shorter codes without storing any statistical model;
only the single byte s needs to be kept. The split is tuned per dataset by
an exhaustive sweep over s.
"""

from __future__ import annotations

from bisect import bisect_left
from typing import Iterable, Mapping

from .errors import FormatError


def _check_s(s: int) -> None:
    if not 1 <= s <= 255:
        raise ValueError(f"stopper count must be in [1, 255], got {s}")


def codeword_length(v: int, s: int) -> int:
    """Number of bytes the codec uses for value v."""
    _check_s(s)
    c = 256 - s
    k = 1
    base = 0
    block = s
    while v >= base + block:
        base += block
        block *= c
        k += 1
    return k


def scdc_encode(values: Iterable[int], s: int) -> bytes:
    _check_s(s)
    c = 256 - s
    out = bytearray()
    for v in values:
        if v < 0:
            raise ValueError("codec accepts naturals only")
        k = 1
        base = 0
        block = s
        while v >= base + block:
            base += block
            block *= c
            k += 1
        x = v - base
        q, r = divmod(x, s)
        digits = []
        for _ in range(k - 1):
            q, d = divmod(q, c)
            digits.append(d)
        for d in reversed(digits):
            out.append(s + d)
        out.append(r)
    return bytes(out)


def scdc_decode_next(data: bytes, pos: int, s: int) -> tuple[int, int]:
    """Decode one codeword starting at pos; returns (value, next position)."""
    _check_s(s)
    c = 256 - s
    q = 0
    k = 1
    n = len(data)
    while True:
        if pos >= n:
            raise FormatError("byte stream ends mid-codeword")
        b = data[pos]
        pos += 1
        if b < s:
            break
        q = q * c + (b - s)
        k += 1
    base = 0
    block = s
    for _ in range(k - 1):
        base += block
        block *= c
    return base + q * s + b, pos


def scdc_decode_all(data: bytes, s: int) -> list[int]:
    out = []
    pos = 0
    n = len(data)
    while pos < n:
        v, pos = scdc_decode_next(data, pos, s)
        out.append(v)
    return out


def scdc_choose_s(hist: Mapping[int, int]) -> int:
    """The s in [1, 255] minimizing encoded size of the histogram.

    Ties break toward the smallest s. Codeword-length boundaries grow
    geometrically, so each candidate s is costed by bucketing the sorted
    distinct values between boundaries rather than coding them one by one.
    """
    if not hist:
        raise ValueError("histogram is empty")
    vals = sorted(hist)
    weights = [hist[v] for v in vals]
    prefix = [0]
    for w in weights:
        prefix.append(prefix[-1] + w)
    max_v = vals[-1]
    best_s = 1
    best_cost = None
    for s in range(1, 256):
        c = 256 - s
        base = 0
        block = s
        k = 1
        cost = 0
        lo_idx = 0
        while base <= max_v:
            hi = base + block
            hi_idx = bisect_left(vals, hi, lo_idx)
            cost += k * (prefix[hi_idx] - prefix[lo_idx])
            lo_idx = hi_idx
            base = hi
            block *= c
            k += 1
            if best_cost is not None and cost >= best_cost:
                break
        if best_cost is None or cost < best_cost:
            best_cost = cost
            best_s = s
    return best_s
