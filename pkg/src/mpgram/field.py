"""Arithmetic domains for the protocol math.

Two interchangeable domains:

* ``FieldDomain`` -- the prime field Z_p (production prime: the Mersenne
  prime M61 = 2^61 - 1) together with a fixed-point codec that embeds
  reals by scaling and rounding.  All arithmetic is exact, which is what
  the uniform-mask security checks rely on.  Elements are plain Python
  ints in [0, p); Python's arbitrary precision handles the 122-bit
  intermediate products without overflow.
* ``FloatDomain`` -- IEEE double arithmetic, provided so the protocols
  can also be run directly on real-valued data.  No security properties
  are claimed for it.

Small test primes (Z_5, Z_251) are supported by passing ``p`` explicitly;
exhaustive distribution checks are only feasible over tiny fields.
"""

from __future__ import annotations

import struct
from random import Random

from .errors import DomainError, EncodingOverflowError

M61 = (1 << 61) - 1  # 2^61 - 1 = 2305843009213693951


class FixedPointCodec:
    """Embedding of reals into Z_p by scaling with 2**scale_bits.

    encode(x) = round(x * 2**scale_bits) mod p, with negative values
    mapped onto the upper half of the field (p - |.|).  A product of two
    encoded values therefore carries a factor 2**(2*scale_bits), which
    ``decode_dot`` divides out again.
    """

    def __init__(self, scale_bits: int = 16, modulus: int = M61):
        if scale_bits < 0:
            raise DomainError(f"scale_bits must be non-negative, got {scale_bits}")
        self.scale_bits = scale_bits
        self.modulus = modulus
        self.scale = 1 << scale_bits
        # |x| must stay clear of the wrap-around point; for M61 that is
        # 2^(60 - scale_bits) so that sums of products still fit.
        self.max_abs = 2.0 ** (modulus.bit_length() - 1 - scale_bits)

    def encode(self, x: float) -> int:
        if abs(x) >= self.max_abs:
            raise EncodingOverflowError(
                f"|{x}| >= 2^{self.modulus.bit_length() - 1 - self.scale_bits} "
                "cannot be represented at this scale"
            )
        v = round(x * self.scale)
        return v % self.modulus

    def decode(self, v: int) -> float:
        if v > self.modulus // 2:
            v -= self.modulus
        return v / self.scale

    def decode_dot(self, v: int) -> float:
        """Decode a sum of products of two encoded reals.

        Values above p/2 are interpreted as negative.  A true value whose
        magnitude exceeds the headroom wraps silently; callers are
        responsible for the range precondition.
        """
        if v > self.modulus // 2:
            v -= self.modulus
        return v / (self.scale * self.scale)


class FieldDomain:
    """Prime field Z_p with a fixed-point codec for real data."""

    kind = "field"

    def __init__(self, scale_bits: int = 16, p: int = M61):
        if p < 2:
            raise DomainError(f"modulus must be >= 2, got {p}")
        self.p = p
        self.scale_bits = scale_bits
        self.codec = FixedPointCodec(scale_bits, p)
        self.zero = 0
        self.one = 1 % p
        self._bits = p.bit_length()

    # -- field arithmetic ------------------------------------------------

    def add(self, a: int, b: int) -> int:
        s = a + b
        return s - self.p if s >= self.p else s

    def sub(self, a: int, b: int) -> int:
        s = a - b
        return s + self.p if s < 0 else s

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return self.p - a if a else 0

    def inv(self, a: int) -> int:
        """Multiplicative inverse via Fermat: a^(p-2) mod p."""
        if a == 0:
            raise DomainError("no inverse of zero")
        return pow(a, self.p - 2, self.p)

    # -- real <-> field --------------------------------------------------

    def encode(self, x: float) -> int:
        return self.codec.encode(x)

    def decode(self, v: int) -> float:
        return self.codec.decode(v)

    def decode_dot(self, v: int) -> float:
        return self.codec.decode_dot(v)

    # -- sampling --------------------------------------------------------

    def uniform(self, rng: Random) -> int:
        """Uniform element of Z_p via rejection on p.bit_length() bits."""
        while True:
            v = rng.getrandbits(self._bits)
            if v < self.p:
                return v

    def uniform_nonzero(self, rng: Random) -> int:
        while True:
            v = self.uniform(rng)
            if v:
                return v

    # -- serialization (8-byte little-endian unsigned) --------------------

    def to_bytes(self, v: int) -> bytes:
        return v.to_bytes(8, "little")

    def from_bytes(self, b: bytes) -> int:
        v = int.from_bytes(b, "little")
        if v >= self.p:
            raise DomainError(f"serialized value {v} >= modulus {self.p}")
        return v

    def close(self, a: int, b: int, rel_tol: float = 0.0) -> bool:
        return a == b

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FieldDomain)
            and other.p == self.p
            and other.scale_bits == self.scale_bits
        )

    def __hash__(self):
        return hash(("field", self.p, self.scale_bits))

    def __repr__(self):
        return f"FieldDomain(p={self.p}, scale_bits={self.scale_bits})"


class FloatDomain:
    """IEEE binary64 domain, for running the protocols on raw reals.

    Masks are drawn uniformly from [0, 1) and nonzero scalar masks from
    [0.5, 2.0); the latter keeps 1/alpha well conditioned.  Exactness and
    mask-uniformity checks do not apply here.
    """

    kind = "float64"
    zero = 0.0
    one = 1.0

    def add(self, a: float, b: float) -> float:
        return a + b

    def sub(self, a: float, b: float) -> float:
        return a - b

    def mul(self, a: float, b: float) -> float:
        return a * b

    def neg(self, a: float) -> float:
        return -a

    def inv(self, a: float) -> float:
        if a == 0.0:
            raise DomainError("no inverse of zero")
        return 1.0 / a

    def encode(self, x: float) -> float:
        return float(x)

    def decode(self, v: float) -> float:
        return v

    def decode_dot(self, v: float) -> float:
        return v

    def uniform(self, rng: Random) -> float:
        return rng.random()

    def uniform_nonzero(self, rng: Random) -> float:
        return 0.5 + 1.5 * rng.random()

    def to_bytes(self, v: float) -> bytes:
        return struct.pack("<d", v)

    def from_bytes(self, b: bytes) -> float:
        return struct.unpack("<d", b)[0]

    def close(self, a: float, b: float, rel_tol: float = 1e-9) -> bool:
        return abs(a - b) <= rel_tol * max(1.0, abs(a), abs(b))

    def __eq__(self, other) -> bool:
        return isinstance(other, FloatDomain)

    def __hash__(self):
        return hash("float64")

    def __repr__(self):
        return "FloatDomain()"


def make_domain(kind: str, scale_bits: int = 16, p: int = M61):
    """Build a domain from its config name ('field' or 'float')."""
    if kind == "field":
        return FieldDomain(scale_bits=scale_bits, p=p)
    if kind in ("float", "float64"):
        return FloatDomain()
    raise DomainError(f"unknown domain kind {kind!r}")
