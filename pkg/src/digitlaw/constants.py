"""Decimal digits of pi, e, sqrt(2), ln(2), digit files, and random digit streams.

Digits are the fractional part of the expansion by default: pi gives
1415926535..., e gives 7182818284..., sqrt2 4142135623..., ln2 6931471805...
Pass ``include_integer_part=True`` to prepend the integer digit instead.

Generation is fixed-point big-integer arithmetic (gmpy2 ``mpz``) with
``GUARD_DIGITS`` extra digits carried past the last emitted one:

* pi    16 arctan(1/5) - 4 arctan(1/239), series by binary splitting
* e     sum 1/k!, binary splitting
* sqrt2 integer square root of 2 * 10^(2m)
* ln2   18 arcoth(26) - 2 arcoth(4801) + 8 arcoth(8749), binary splitting
"""

from __future__ import annotations

import math
import os
from functools import lru_cache
from typing import Callable, Iterator, Optional

import gmpy2
import numpy as np
from gmpy2 import mpz

from .bayes import N_DIGITS, DigitCounts

__all__ = [
    "CONSTANTS",
    "DEFAULT_CEILING",
    "GUARD_DIGITS",
    "DigitFileError",
    "GenerationCeilingError",
    "DigitStream",
    "fixed_point",
    "digit_string",
    "generate_digits",
    "ingest_digit_file",
    "sample_biased_digits",
    "write_digit_file",
]

CONSTANTS = ("pi", "e", "sqrt2", "ln2")
INTEGER_PARTS = {"pi": 3, "e": 2, "sqrt2": 1, "ln2": 0}
DEFAULT_CEILING = 10**7
GUARD_DIGITS = 10
CHUNK = 1 << 20
LINE_WIDTH = 100

_WHITESPACE = np.frombuffer(b" \t\r\n\v\f", dtype=np.uint8)
_DOT = ord(".")


class GenerationCeilingError(ValueError):
    """Requested expansion is longer than the configured generation ceiling."""


class DigitFileError(ValueError):
    """Malformed digit file; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)


# ---------------------------------------------------------------------------
# big-integer kernels


def _arccot_split(a: int, b: int, x2: mpz, sign: int):
    """Binary splitting of sum_{k=a}^{b-1} sign^k / ((2k+1) x2^k).

    Term ratio p(k)/q(k) = sign/x2 (k >= 1), a(k)/b(k) = 1/(2k+1).  Returns
    (P, Q, B, T) with the partial sum equal to T / (B Q) relative to the
    prefix product up to a; P is just a sign.
    """
    if b - a == 1:
        if a == 0:
            return 1, mpz(1), mpz(1), mpz(1)
        return sign, x2, mpz(2 * a + 1), mpz(sign)
    m = (a + b) // 2
    p1, q1, b1, t1 = _arccot_split(a, m, x2, sign)
    p2, q2, b2, t2 = _arccot_split(m, b, x2, sign)
    return p1 * p2, q1 * q2, b1 * b2, b2 * q2 * t1 + p1 * b1 * t2


def _arccot_fixed(x: int, digits: int, hyperbolic: bool = False) -> mpz:
    """floor-ish of arccot(x) (or arcoth(x)) * 10^digits."""
    terms = int(digits * math.log(10) / (2 * math.log(x))) + 2
    sign = 1 if hyperbolic else -1
    _, q, b, t = _arccot_split(0, terms, mpz(x) * x, sign)
    return t * mpz(10) ** digits // (b * q * x)


def _e_split(a: int, b: int):
    """sum_{k=a+1}^{b} a!/k! = P/Q with Q = (a+1)...b."""
    if b - a == 1:
        return mpz(1), mpz(b)
    m = (a + b) // 2
    p1, q1 = _e_split(a, m)
    p2, q2 = _e_split(m, b)
    return p1 * q2 + p2, q1 * q2


def _e_fixed(digits: int) -> mpz:
    target = digits * math.log(10) + 2.0
    lo, hi = 1, 2
    while math.lgamma(hi + 1) < target:
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if math.lgamma(mid + 1) < target:
            lo = mid
        else:
            hi = mid
    p, q = _e_split(0, hi)
    return (p + q) * mpz(10) ** digits // q


def _pi_fixed(digits: int) -> mpz:
    return 16 * _arccot_fixed(5, digits) - 4 * _arccot_fixed(239, digits)


def _sqrt2_fixed(digits: int) -> mpz:
    return gmpy2.isqrt(2 * mpz(10) ** (2 * digits))


def _ln2_fixed(digits: int) -> mpz:
    return (
        18 * _arccot_fixed(26, digits, hyperbolic=True)
        - 2 * _arccot_fixed(4801, digits, hyperbolic=True)
        + 8 * _arccot_fixed(8749, digits, hyperbolic=True)
    )


_FIXED: dict[str, Callable[[int], mpz]] = {
    "pi": _pi_fixed,
    "e": _e_fixed,
    "sqrt2": _sqrt2_fixed,
    "ln2": _ln2_fixed,
}


def fixed_point(constant: str, digits: int) -> mpz:
    """The constant times 10^digits, truncated; correct up to a few units in the last place."""
    if constant not in _FIXED:
        raise ValueError(f"unknown constant {constant!r}; choose from {', '.join(CONSTANTS)}")
    return _FIXED[constant](int(digits))


@lru_cache(maxsize=8)
def _fractional_digits(constant: str, length: int) -> str:
    scale = length + GUARD_DIGITS
    value = fixed_point(constant, scale)
    frac = value - INTEGER_PARTS[constant] * mpz(10) ** scale
    if frac < 0 or frac >= mpz(10) ** scale:  # pragma: no cover - kernel bug guard
        raise RuntimeError(f"{constant}: fixed-point value out of range")
    return frac.digits().zfill(scale)[:length]


def digit_string(
    constant: str,
    length: int,
    *,
    include_integer_part: bool = False,
    ceiling: int = DEFAULT_CEILING,
) -> str:
    """First ``length`` decimal digits of a constant as a string."""
    if constant not in _FIXED:
        raise ValueError(f"unknown constant {constant!r}; choose from {', '.join(CONSTANTS)}")
    length = int(length)
    if length < 1:
        raise ValueError("length must be at least 1")
    if length > ceiling:
        raise GenerationCeilingError(
            f"{length} digits of {constant} exceeds the generation ceiling of {ceiling}; "
            "supply a digit file instead (or raise the ceiling explicitly)"
        )
    if include_integer_part:
        head = str(INTEGER_PARTS[constant])
        return head + _fractional_digits(constant, length - 1) if length > 1 else head
    return _fractional_digits(constant, length)


# ---------------------------------------------------------------------------
# streams


class DigitStream:
    """Re-iterable source of decimal digits, delivered as uint8 numpy chunks.

    ``source`` is a human-readable provenance string; ``length`` is known for
    generated and sampled streams and ``None`` for files until read.
    """

    def __init__(
        self,
        chunk_factory: Callable[[], Iterator[np.ndarray]],
        *,
        source: str,
        block_size: int = 1000,
        length: Optional[int] = None,
    ):
        if block_size < 1:
            raise ValueError("block_size must be positive")
        self._factory = chunk_factory
        self.source = source
        self.block_size = int(block_size)
        self.length = length

    def __repr__(self) -> str:
        return f"DigitStream({self.source!r}, block_size={self.block_size}, length={self.length})"

    def chunks(self) -> Iterator[np.ndarray]:
        yield from self._factory()

    def blocks(self) -> Iterator[np.ndarray]:
        """Consecutive blocks of ``block_size`` digits; the last may be short."""
        carry = np.empty(0, dtype=np.uint8)
        bs = self.block_size
        for chunk in self.chunks():
            if carry.size:
                chunk = np.concatenate([carry, chunk])
            full = (chunk.size // bs) * bs
            for i in range(0, full, bs):
                yield chunk[i : i + bs]
            carry = chunk[full:]
        if carry.size:
            yield carry

    def digits(self) -> np.ndarray:
        """The whole stream as one array; only sensible for modest lengths."""
        parts = list(self.chunks())
        return np.concatenate(parts) if parts else np.empty(0, dtype=np.uint8)

    def counts(self) -> DigitCounts:
        tally = np.zeros(N_DIGITS, dtype=np.int64)
        for chunk in self.chunks():
            tally += np.bincount(chunk, minlength=N_DIGITS)
        return DigitCounts(tuple(tally.tolist()))

    def write(self, path) -> int:
        """Write in the digit cache format; returns the number of digits."""
        return write_digit_file(path, self.chunks())


def write_digit_file(path, chunks) -> int:
    """Digit cache format: bare digits, a newline after every 100."""
    written = 0
    pending = b""
    with open(path, "wb") as fh:
        for chunk in chunks:
            data = pending + (np.asarray(chunk, dtype=np.uint8) + 48).tobytes()
            full = len(data) - len(data) % LINE_WIDTH
            for i in range(0, full, LINE_WIDTH):
                fh.write(data[i : i + LINE_WIDTH])
                fh.write(b"\n")
            pending = data[full:]
            written += len(chunk)
        if pending:
            fh.write(pending + b"\n")
    return written


def _string_chunks(text: str) -> Iterator[np.ndarray]:
    raw = np.frombuffer(text.encode("ascii"), dtype=np.uint8)
    for i in range(0, raw.size, CHUNK):
        yield raw[i : i + CHUNK] - 48


def generate_digits(
    constant: str,
    length: int,
    *,
    block_size: int = 1000,
    include_integer_part: bool = False,
    ceiling: int = DEFAULT_CEILING,
) -> DigitStream:
    """Stream the first ``length`` digits of pi, e, sqrt2 or ln2.

    Raises :class:`GenerationCeilingError` above ``ceiling`` digits.
    """
    text = digit_string(constant, length, include_integer_part=include_integer_part, ceiling=ceiling)
    tag = "+int" if include_integer_part else ""
    return DigitStream(
        lambda: _string_chunks(text),
        source=f"generated:{constant}{tag}:{length}",
        block_size=block_size,
        length=len(text),
    )


# A leading integer part longer than this is not looked for.
HEADER_MAX = 64


def _body_digits(raw: np.ndarray, offset: int, dot_seen: bool) -> np.ndarray:
    """Digits of a chunk past the header; anything but digits and whitespace is an error."""
    is_digit = (raw >= 48) & (raw <= 57)
    ok = is_digit | np.isin(raw, _WHITESPACE)
    if not ok.all():
        i = int(np.argmin(ok))
        if raw[i] == _DOT:
            what = "more than one '.'" if dot_seen else "'.' after digits were already read"
            raise DigitFileError(what, offset + i)
        raise DigitFileError(f"invalid character {bytes(raw[i:i + 1])!r}", offset + i)
    return raw[is_digit] - 48


def _split_header(head: bytes):
    """Split off an ``<integer>.`` prefix.

    Returns (bytes after the dot, its offset) when ``head`` starts with one;
    None when there is no prefix (no dot, or digits too long to be one).
    """
    dot = head.find(b".")
    if dot < 0:
        return None
    prefix = head[:dot]
    for i, ch in enumerate(prefix):
        if not (48 <= ch <= 57 or ch in b" \t\r\n\v\f"):
            raise DigitFileError(f"invalid character {bytes([ch])!r}", i)
    if len(prefix.split()) > 1 or len(prefix.strip()) > HEADER_MAX:
        raise DigitFileError("'.' after digits were already read", dot)
    return head[dot + 1 :], dot + 1


def _file_chunks(path: str, chunk_size: int) -> Iterator[np.ndarray]:
    emitted = 0
    with open(path, "rb") as fh:
        # Buffer the start of the file until the integer-part question is
        # settled: a dot shows up, or too many digits, or a foreign byte.
        head = b""
        while True:
            buf = fh.read(chunk_size)
            head += buf
            settled = (
                not buf
                or b"." in head
                or len(head.strip()) > HEADER_MAX + 1
                or any(not (48 <= c <= 57 or c in b" \t\r\n\v\f") for c in buf)
            )
            if settled:
                break
        split = _split_header(head)
        dot_seen = split is not None
        rest, offset = split if dot_seen else (head, 0)
        pieces = [rest]
        while pieces:
            data = pieces.pop()
            raw = np.frombuffer(data, dtype=np.uint8)
            digits = _body_digits(raw, offset, dot_seen)
            offset += raw.size
            if digits.size:
                emitted += digits.size
                yield digits
            buf = fh.read(chunk_size)
            if buf:
                pieces.append(buf)
    if emitted == 0:
        raise DigitFileError("file contains no digits")


def ingest_digit_file(path, *, block_size: int = 1000, chunk_size: int = CHUNK) -> DigitStream:
    """Stream digits from an ASCII file without loading it whole.

    Whitespace is ignored anywhere.  One leading ``<integer-part>.`` prefix
    (at most ``HEADER_MAX`` digits) is stripped.  Any other
    character raises :class:`DigitFileError` carrying its byte offset, which
    surfaces while the stream is consumed.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    if os.path.getsize(path) == 0:
        raise DigitFileError("file is empty", 0)
    return DigitStream(
        lambda: _file_chunks(path, chunk_size),
        source=f"file:{path}",
        block_size=block_size,
    )


def _check_probabilities(probabilities) -> np.ndarray:
    p = np.asarray(probabilities, dtype=np.float64)
    if p.shape != (N_DIGITS,):
        raise ValueError(f"need {N_DIGITS} digit probabilities")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("digit probabilities must be finite and nonnegative")
    if abs(p.sum() - 1.0) > 1e-12:
        raise ValueError(f"digit probabilities sum to {p.sum()!r}, not 1")
    return p


def sample_biased_digits(
    probabilities, length: int, seed: int, *, block_size: int = 1000
) -> DigitStream:
    """Pseudo-random i.i.d. digits with the given probabilities.

    PCG64 seeded from ``seed``; the same seed always yields the same stream.
    """
    p = _check_probabilities(probabilities)
    length = int(length)
    if length < 1:
        raise ValueError("length must be at least 1")
    cdf = np.cumsum(p)
    cdf[-1] = 1.0

    def chunks():
        rng = np.random.default_rng(seed)
        left = length
        while left:
            m = min(left, CHUNK)
            yield np.searchsorted(cdf, rng.random(m), side="right").astype(np.uint8)
            left -= m

    return DigitStream(chunks, source=f"sampled:seed={seed}:{length}", block_size=block_size, length=length)
