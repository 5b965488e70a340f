"""Building the randomized encoding of a whole dot product.

The generator splits the index range at the largest power of two below
its length, books one fresh "split" random on each side (+1 left, -1
right, so everything telescopes away), and recurses down to per-index
mul-add gadgets with four randoms each: 5d - 1 randoms in total.
"""

from random import Random

from mpgram import (
    FieldDomain,
    decode_dot,
    dump_scheme,
    encode_x_side,
    encode_y_side,
    generate_scheme,
    offline_components,
    sample_randoms,
    y_random_triples,
)

scheme = generate_scheme(7)
print(dump_scheme(scheme))

print(f"\nrandom budget: {scheme.total_randoms} = 4 per leaf * 7 leaves + 6 splits")

# one party (the scheme owner) holds x and every random; the peer holds y
# and receives only the three per-leaf randoms its components mention
field = FieldDomain(scale_bits=0, p=251)
rng = Random(7)
randoms = sample_randoms(scheme, field, rng)
x = [field.uniform(rng) for _ in range(7)]
y = [field.uniform(rng) for _ in range(7)]

x_comps = encode_x_side(field, x, scheme, randoms)            # (c1, c2) per leaf
triples = y_random_triples(scheme, randoms)                    # what crosses the wire
y_comps = encode_y_side(field, y, scheme, triples)             # (c3, c4) per leaf
offline = offline_components(field, scheme, randoms)           # c5 per leaf

print(f"\nx = {x}\ny = {y}")
print(f"x-side components : {x_comps}")
print(f"y-side components : {y_comps}")
print(f"offline components: {offline}")

decoded = decode_dot(field, x_comps, y_comps, offline)
plain = 0
for a, b in zip(x, y):
    plain = field.add(plain, field.mul(a, b))
print(f"\ndecoded dot product = {decoded}; plaintext = {plain}; exact match: {decoded == plain}")

# the decoder sees 5 scalars per leaf and nothing else -- fresh randoms
# per sample pair keep even relative differences of the inputs hidden
print(f"scalars revealed to the decoder: {5 * scheme.d} (vs 14 plaintext inputs)")
