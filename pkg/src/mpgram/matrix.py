"""Dense matrices in features x samples orientation.

Every data matrix in the protocols is f x n with one column per sample,
so the gram block of two parties is ``gram_t(A, B) = A^T B`` with shape
(A.cols x B.cols).  Matrices are immutable after construction and carry
their scalar domain; multiplication is the naive triple loop, which is
fine at the intended scale and keeps field arithmetic exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from random import Random
from typing import Sequence

from .errors import DimensionError, DomainMismatchError


@dataclass(frozen=True)
class Matrix:
    rows: int  # f, features
    cols: int  # n, samples
    data: tuple = field(repr=False)  # row-major scalars
    domain: object = field(repr=False, default=None)

    def __post_init__(self):
        if len(self.data) != self.rows * self.cols:
            raise DimensionError(
                f"data length {len(self.data)} != {self.rows} features x {self.cols} samples"
            )

    def get(self, r: int, c: int):
        return self.data[r * self.cols + c]

    def row(self, r: int) -> tuple:
        return self.data[r * self.cols : (r + 1) * self.cols]

    def col(self, c: int) -> tuple:
        return self.data[c :: self.cols] if self.cols else ()

    def to_rows(self) -> list:
        return [list(self.row(r)) for r in range(self.rows)]

    def transpose(self) -> "Matrix":
        data = tuple(self.data[r * self.cols + c] for c in range(self.cols) for r in range(self.rows))
        return Matrix(self.cols, self.rows, data, self.domain)

    @staticmethod
    def from_rows(rows: Sequence[Sequence], domain) -> "Matrix":
        nr = len(rows)
        nc = len(rows[0]) if nr else 0
        if any(len(r) != nc for r in rows):
            raise DimensionError("ragged rows")
        return Matrix(nr, nc, tuple(x for r in rows for x in r), domain)

    @staticmethod
    def zeros(rows: int, cols: int, domain) -> "Matrix":
        return Matrix(rows, cols, (domain.zero,) * (rows * cols), domain)


def _check_same_domain(a: Matrix, b: Matrix):
    if a.domain != b.domain:
        raise DomainMismatchError(f"mixed domains: {a.domain!r} vs {b.domain!r}")


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    _check_same_domain(a, b)
    if (a.rows, a.cols) != (b.rows, b.cols):
        raise DimensionError(
            f"shape mismatch: {a.rows}x{a.cols} vs {b.rows}x{b.cols} (features x samples)"
        )
    add = a.domain.add
    return Matrix(a.rows, a.cols, tuple(map(add, a.data, b.data)), a.domain)


def mat_sub(a: Matrix, b: Matrix) -> Matrix:
    _check_same_domain(a, b)
    if (a.rows, a.cols) != (b.rows, b.cols):
        raise DimensionError(
            f"shape mismatch: {a.rows}x{a.cols} vs {b.rows}x{b.cols} (features x samples)"
        )
    sub = a.domain.sub
    return Matrix(a.rows, a.cols, tuple(map(sub, a.data, b.data)), a.domain)


def mat_scale(s, a: Matrix) -> Matrix:
    mul = a.domain.mul
    return Matrix(a.rows, a.cols, tuple(mul(s, x) for x in a.data), a.domain)


def gram_t(a: Matrix, b: Matrix) -> Matrix:
    """A^T B for matrices sharing the feature dimension; shape a.cols x b.cols."""
    _check_same_domain(a, b)
    if a.rows != b.rows:
        raise DimensionError(
            f"feature dimension mismatch: {a.rows} vs {b.rows} (features x samples)"
        )
    dom = a.domain
    add, mul = dom.add, dom.mul
    f, na, nb = a.rows, a.cols, b.cols
    out = []
    acols = [a.col(i) for i in range(na)]
    bcols = [b.col(j) for j in range(nb)]
    for i in range(na):
        ai = acols[i]
        for j in range(nb):
            bj = bcols[j]
            acc = dom.zero
            for k in range(f):
                acc = add(acc, mul(ai[k], bj[k]))
            out.append(acc)
    return Matrix(na, nb, tuple(out), dom)


def random_matrix(shape: tuple, domain, rng: Random) -> Matrix:
    """Matrix of i.i.d. uniform domain elements from a seeded generator."""
    rows, cols = shape
    uniform = domain.uniform
    return Matrix(rows, cols, tuple(uniform(rng) for _ in range(rows * cols)), domain)


def matrices_close(a: Matrix, b: Matrix, rel_tol: float = 1e-9) -> bool:
    if (a.rows, a.cols) != (b.rows, b.cols):
        return False
    close = a.domain.close
    return all(close(x, y, rel_tol) for x, y in zip(a.data, b.data))


def max_abs_deviation(a: Matrix, b: Matrix) -> float:
    """Max |a_ij - b_ij| after decoding both sides to reals (dot-product scale)."""
    if (a.rows, a.cols) != (b.rows, b.cols):
        raise DimensionError("shape mismatch")
    dd = a.domain.decode_dot
    return max((abs(dd(x) - dd(y)) for x, y in zip(a.data, b.data)), default=0.0)


def encode_real_matrix(rows: Sequence[Sequence[float]], domain) -> Matrix:
    enc = domain.encode
    return Matrix.from_rows([[enc(x) for x in r] for r in rows], domain)


def decode_gram_matrix(m: Matrix) -> list:
    """Gram entries back to reals (rescales by the squared fixed-point factor)."""
    dd = m.domain.decode_dot
    return [[dd(m.get(r, c)) for c in range(m.cols)] for r in range(m.rows)]


# -- CSV interchange ----------------------------------------------------
#
# Header-free, comma-separated, one matrix row per line.  Float-domain
# files hold reals; field-domain files hold already-encoded integers.


def save_csv(m: Matrix, path) -> None:
    with open(path, "w") as fh:
        for r in range(m.rows):
            if m.domain is not None and m.domain.kind == "field":
                fh.write(",".join(str(x) for x in m.row(r)))
            else:
                fh.write(",".join(format(x, ".17g") for x in m.row(r)))
            fh.write("\n")


def load_csv(path, domain, transpose: bool = False) -> Matrix:
    rows = _read_csv_rows(path, integer=(domain.kind == "field"))
    m = Matrix.from_rows(rows, domain)
    return m.transpose() if transpose else m


def load_real_csv(path, transpose: bool = False) -> list:
    rows = _read_csv_rows(path, integer=False)
    if transpose:
        return [list(col) for col in zip(*rows)]
    return rows


def _read_csv_rows(path, integer: bool) -> list:
    parse = int if integer else float
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([parse(tok) for tok in line.split(",")])
    return rows
