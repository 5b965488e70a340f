"""The two affine encoding gadgets and their simulators.

An encoding of f(inputs) is a tuple of components, each an affine
function of one input plus shared randomness.  Decoding recovers f and,
for *perfect* encodings, nothing else: a simulator that only knows the
output produces component tuples with exactly the same distribution.
"""

from collections import Counter
from itertools import product

from mpgram import (
    FieldDomain,
    add_decode,
    add_encode,
    muladd_decode,
    muladd_encode,
    muladd_simulate,
)

z5 = FieldDomain(scale_bits=0, p=5)
f = FieldDomain(scale_bits=0, p=251)

# addition: (s1 + r, s2 - r) hides the split of the sum
e = add_encode(f, 3, 4, 10)
print(f"add_encode(3, 4; r=10) = ({e.c1}, {e.c2}); decode = {add_decode(f, e)}")

# multiplication-addition: five components computing s1*s2 + s3
enc = muladd_encode(f, 2, 3, 1, 1, 1, 1, 1)
print(f"muladd_encode(2, 3, 1; r=1,1,1,1) = {enc.as_tuple()}")
print(f"decode = c1*c3 + c2 + c4 + c5 = {muladd_decode(f, enc)} (= 2*3 + 1)")

# the simulator hits the same tuple when fed the first four components
sim = muladd_simulate(f, 7, enc.c1, enc.c2, enc.c3, enc.c4)
print(f"simulate(t=7; c1..c4) = {sim.as_tuple()} -> matches: {sim == enc}")

# perfect privacy, made executable: over Z_5, enumerate all 5^4 random
# tuples of the real encoding and all 5^4 coin tuples of the simulator;
# the two multisets of 5-tuples are identical, so nothing beyond the
# output value leaks
s1, s2, s3 = 2, 4, 1
t = z5.add(z5.mul(s1, s2), s3)
real = Counter(
    muladd_encode(z5, s1, s2, s3, *rs).as_tuple() for rs in product(range(5), repeat=4)
)
sim_hist = Counter(
    muladd_simulate(z5, t, *cs).as_tuple() for cs in product(range(5), repeat=4)
)
print(f"\nexhaustive Z_5 check for inputs ({s1},{s2},{s3}), t={t}:")
print(f"  distinct real tuples      : {len(real)}")
print(f"  distinct simulated tuples : {len(sim_hist)}")
print(f"  histograms identical      : {real == sim_hist}")
