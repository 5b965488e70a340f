"""Decomposable affine randomized encodings for addition and mul-add.

These are the two leaf gadgets every dot-product encoding is built from.
Each component of an encoding is an affine function of a single input
plus randomness, so the components can be computed by different parties.
The simulators are first-class operations, not test scaffolding: perfect
privacy means the simulator's output distribution (over uniform coins)
equals the real encoding's distribution (over uniform randomness), and
shipping both sides makes that claim directly executable.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class AddEncoding:
    """Encoding of s1 + s2; the components sum to the encoded value."""

    c1: object
    c2: object


@dataclass(frozen=True)
class MulAddEncoding:
    """Encoding of s1*s2 + s3; decodes as c1*c3 + c2 + c4 + c5."""

    c1: object
    c2: object
    c3: object
    c4: object
    c5: object

    def as_tuple(self):
        return (self.c1, self.c2, self.c3, self.c4, self.c5)


def add_encode(dom, s1, s2, r) -> AddEncoding:
    """(s1 + r, s2 - r) for uniform r."""
    return AddEncoding(dom.add(s1, r), dom.sub(s2, r))


def add_decode(dom, e: AddEncoding):
    return dom.add(e.c1, e.c2)


def add_simulate(dom, t, coin) -> AddEncoding:
    """Two values with sum t, the first being the uniform coin."""
    return AddEncoding(coin, dom.sub(t, coin))


def muladd_encode(dom, s1, s2, s3, r1, r2, r3, r4) -> MulAddEncoding:
    """(s1 - r1, r2*s1 - r1*r2 + r3, s2 - r2, r1*s2 + r4, s3 - r3 - r4)."""
    c1 = dom.sub(s1, r1)
    c2 = dom.add(dom.sub(dom.mul(r2, s1), dom.mul(r1, r2)), r3)
    c3 = dom.sub(s2, r2)
    c4 = dom.add(dom.mul(r1, s2), r4)
    c5 = dom.sub(dom.sub(s3, r3), r4)
    return MulAddEncoding(c1, c2, c3, c4, c5)


def muladd_decode(dom, e: MulAddEncoding):
    return dom.add(dom.add(dom.add(dom.mul(e.c1, e.c3), e.c2), e.c4), e.c5)


def muladd_simulate(dom, t, c1, c2, c3, c4) -> MulAddEncoding:
    """Five-tuple with uniform first four components decoding exactly to t.

    c5 = -c1*c3 + t - c2 - c4, so muladd_decode always recovers t.
    """
    c5 = dom.sub(dom.sub(dom.sub(t, dom.mul(c1, c3)), c2), c4)
    return MulAddEncoding(c1, c2, c3, c4, c5)
