"""Exact arithmetic over finite fields F_q and dense linear algebra.

Elements are stored as integers 0..q-1.  For q = p^e with e > 1 the integer
n encodes the coefficient vector (c_0, ..., c_{e-1}) of n = sum c_i p^i,
read as the residue class of sum c_i x^i modulo the reduction polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NonPrime, ShapeMismatch, Singular, UnsupportedSize

DEFAULT_SIZE_CAP = 2 ** 20


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _poly_mod(a: list, m: list, p: int) -> list:
    """Remainder of a modulo monic m; coefficient lists low degree first."""
    a = list(a)
    dm = len(m) - 1
    while len(a) - 1 >= dm and any(a):
        while a and a[-1] == 0:
            a.pop()
        if len(a) - 1 < dm:
            break
        c = a[-1]
        shift = len(a) - 1 - dm
        for i, mc in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mc) % p
        while a and a[-1] == 0:
            a.pop()
    return a


def _int_to_poly(n: int, p: int, length: int) -> list:
    out = []
    for _ in range(length):
        out.append(n % p)
        n //= p
    return out


def _is_irreducible(f: list, p: int) -> bool:
    """Trial division by all monic polynomials of degree 1..deg(f)//2."""
    deg = len(f) - 1
    for d in range(1, deg // 2 + 1):
        for n in range(p ** d):
            g = _int_to_poly(n, p, d) + [1]
            if not _poly_mod(f, g, p):
                return False
    return True


def smallest_irreducible(p: int, e: int) -> tuple:
    """First monic irreducible x^e + r(x), ordering r by its base-p integer code."""
    for n in range(p ** e):
        f = _int_to_poly(n, p, e) + [1]
        if f[0] == 0:
            continue
        if _is_irreducible(f, p):
            return tuple(f)
    raise AssertionError("no irreducible polynomial found")


class Field:
    """The finite field F_q, q = p^e.  Immutable."""

    def __init__(self, p: int, e: int, reduction: Optional[tuple] = None):
        self.p = p
        self.e = e
        self.q = p ** e
        self.reduction = tuple(reduction) if reduction is not None else None
        self._exp = None
        self._log = None
        if e == 1:
            self._inv_table = np.zeros(p, dtype=np.int64)
            for a in range(1, p):
                self._inv_table[a] = pow(a, p - 2, p)

    # identity and hashing
    def key(self) -> tuple:
        return (self.p, self.e, self.reduction)

    def __eq__(self, other) -> bool:
        return isinstance(other, Field) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        if self.e == 1:
            return f"F_{self.p}"
        return f"F_{self.q}[{self.reduction}]"

    # scalar helpers for extension fields
    def _poly_mul_int(self, a: int, b: int) -> int:
        p, e = self.p, self.e
        pa = _int_to_poly(a, p, e)
        pb = _int_to_poly(b, p, e)
        prod = [0] * (2 * e - 1)
        for i, x in enumerate(pa):
            if x:
                for j, y in enumerate(pb):
                    prod[i + j] = (prod[i + j] + x * y) % p
        r = _poly_mod(prod, list(self.reduction), p)
        return sum(c * p ** i for i, c in enumerate(r))

    def _tables(self):
        if self._exp is None:
            q = self.q
            for g in range(2, q):
                exp = np.zeros(q - 1, dtype=np.int64)
                x = 1
                seen_one = False
                for k in range(q - 1):
                    exp[k] = x
                    x = self._poly_mul_int(x, g)
                    if x == 1 and k < q - 2:
                        seen_one = True
                        break
                if not seen_one:
                    log = np.zeros(q, dtype=np.int64)
                    log[exp] = np.arange(q - 1)
                    self._exp, self._log = exp, log
                    break
            else:  # q == 2 handled by e == 1; q == 3.. prime
                raise AssertionError("primitive element not found")
        return self._exp, self._log

    # vectorised element arithmetic
    def add(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.e == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
        pw = 1
        for _ in range(self.e):
            out = out + ((a // pw + b // pw) % self.p) * pw
            pw *= self.p
        return out

    def neg(self, a):
        a = np.asarray(a, dtype=np.int64)
        if self.e == 1:
            return (-a) % self.p
        if self.p == 2:
            return a.copy()
        out = np.zeros(a.shape, dtype=np.int64)
        pw = 1
        for _ in range(self.e):
            out = out + ((-(a // pw)) % self.p) * pw
            pw *= self.p
        return out

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.e == 1:
            return (a * b) % self.p
        exp, log = self._tables()
        out = exp[(log[a] + log[b]) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, out)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero")
        if self.e == 1:
            return self._inv_table[a]
        exp, log = self._tables()
        return exp[(-log[a]) % (self.q - 1)]

    def matmul(self, A, B):
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        if A.shape[1] != B.shape[0]:
            raise ShapeMismatch(f"cannot multiply {A.shape} by {B.shape}")
        if self.e == 1:
            if A.shape[1] == 0:
                return np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
            return (A @ B) % self.p
        out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
        for k in range(A.shape[1]):
            out = self.add(out, self.mul(A[:, k:k + 1], B[k:k + 1, :]))
        return out

    def elements(self) -> range:
        return range(self.q)

    def serialize(self, x: int):
        if self.e == 1:
            return int(x)
        return _int_to_poly(int(x), self.p, self.e)

    def deserialize(self, v) -> int:
        if isinstance(v, (list, tuple)):
            if len(v) != self.e:
                raise ValueError(f"expected {self.e} coefficients, got {len(v)}")
            return sum((int(c) % self.p) * self.p ** i for i, c in enumerate(v))
        if self.e != 1:
            raise ValueError("extension-field elements serialize as coefficient lists")
        return int(v) % self.p


def field_make(p: int, e: int = 1, cap: int = DEFAULT_SIZE_CAP) -> Field:
    """Build F_{p^e}; the reduction polynomial is the smallest irreducible one."""
    if not _is_prime(p):
        raise NonPrime(p)
    if e < 1:
        raise ValueError("exponent must be positive")
    if p ** e > cap:
        raise UnsupportedSize(f"{p}^{e} exceeds field size cap {cap}")
    if e == 1:
        return Field(p, 1)
    return Field(p, e, smallest_irreducible(p, e))


# ---------------------------------------------------------------------------
# dense linear algebra on raw int64 arrays


def rref(F: Field, A) -> tuple:
    """Reduced row echelon form with first-nonzero pivoting.

    Returns (R, pivots) where pivots lists the pivot columns.
    """
    R = np.array(A, dtype=np.int64, copy=True)
    if R.ndim != 2:
        raise ShapeMismatch("rref expects a 2-d array")
    nrows, ncols = R.shape
    pivots = []
    r = 0
    prime = F.e == 1
    p = F.p
    for c in range(ncols):
        if r >= nrows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            R[[r, i]] = R[[i, r]]
        if prime:
            R[r] = (R[r] * F._inv_table[R[r, c]]) % p
            col = R[:, c].copy()
            col[r] = 0
            if np.any(col):
                R = (R - np.outer(col, R[r])) % p
        else:
            R[r] = F.mul(R[r], F.inv(R[r, c]))
            col = R[:, c].copy()
            col[r] = 0
            if np.any(col):
                R = F.sub(R, F.mul(col[:, None], R[r][None, :]))
        pivots.append(c)
        r += 1
    return R, pivots


def rank(F: Field, A) -> int:
    A = np.asarray(A)
    if A.size == 0:
        return 0
    return len(rref(F, A)[1])


def nullspace(F: Field, A) -> np.ndarray:
    """Basis of {x : A x = 0}, returned as the rows of a (k, cols) array."""
    A = np.asarray(A, dtype=np.int64)
    ncols = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(ncols, dtype=np.int64)
    R, pivots = rref(F, A)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = np.zeros((len(free), ncols), dtype=np.int64)
    for k, fcol in enumerate(free):
        basis[k, fcol] = 1
        for r, pc in enumerate(pivots):
            basis[k, pc] = F.neg(R[r, fcol])
    return basis


def solve(F: Field, A, B) -> tuple:
    """Solve A X = B.  Returns (X particular or None, nullspace rows of A)."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    vec = B.ndim == 1
    if vec:
        B = B[:, None]
    if A.shape[0] != B.shape[0]:
        raise ShapeMismatch(f"A has {A.shape[0]} rows, B has {B.shape[0]}")
    n = A.shape[1]
    aug = np.concatenate([A, B], axis=1)
    R, pivots = rref(F, aug)
    if any(pc >= n for pc in pivots):
        return None, nullspace(F, A)
    X = np.zeros((n, B.shape[1]), dtype=np.int64)
    for r, pc in enumerate(pivots):
        X[pc] = R[r, n:]
    if vec:
        X = X[:, 0]
    return X, nullspace(F, A)


def inverse(F: Field, A) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeMismatch(f"inverse needs a square matrix, got {A.shape}")
    n = A.shape[0]
    aug = np.concatenate([A, np.eye(n, dtype=np.int64)], axis=1)
    R, pivots = rref(F, aug)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise Singular("matrix is not invertible")
    return R[:, n:]


def is_invertible(F: Field, A) -> bool:
    A = np.asarray(A)
    return A.shape[0] == A.shape[1] and rank(F, A) == A.shape[0]


def row_space(F: Field, A) -> np.ndarray:
    """Echelon basis (rows) of the row space of A."""
    A = np.asarray(A, dtype=np.int64)
    if A.shape[0] == 0:
        return A.reshape(0, A.shape[1])
    R, pivots = rref(F, A)
    return R[:len(pivots)]


def in_span(F: Field, basis_rows, v) -> bool:
    basis_rows = np.asarray(basis_rows, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64).reshape(1, -1)
    if basis_rows.shape[0] == 0:
        return not np.any(v)
    return rank(F, np.concatenate([basis_rows, v])) == rank(F, basis_rows)


def complement_basis(F: Field, sub_rows, n: int) -> np.ndarray:
    """Standard basis vectors completing the row space of sub_rows to F^n."""
    sub_rows = np.asarray(sub_rows, dtype=np.int64)
    if sub_rows.size == 0:
        sub = np.zeros((0, n), dtype=np.int64)
    else:
        sub = row_space(F, sub_rows.reshape(-1, n))
    pivots = set()
    for row in sub:
        pivots.add(int(np.flatnonzero(row)[0]))
    rest = [i for i in range(n) if i not in pivots]
    out = np.zeros((len(rest), n), dtype=np.int64)
    for k, i in enumerate(rest):
        out[k, i] = 1
    return out


def all_vectors(F: Field, n: int):
    """Iterate over all vectors of F^n in lexicographic integer order."""
    q = F.q
    for code in range(q ** n):
        v = np.zeros(n, dtype=np.int64)
        c = code
        for i in range(n):
            v[i] = c % q
            c //= q
        yield v


def combos(F: Field, basis: np.ndarray):
    """Iterate over all linear combinations of the rows of basis."""
    basis = np.asarray(basis, dtype=np.int64)
    k = basis.shape[0]
    for coeffs in all_vectors(F, k):
        if k == 0:
            yield np.zeros(basis.shape[1:], dtype=np.int64)
        else:
            yield _lincomb(F, coeffs, basis)


def _lincomb(F: Field, coeffs, basis):
    if F.e == 1:
        return np.tensordot(coeffs, basis, axes=(0, 0)) % F.p
    out = np.zeros(basis.shape[1:], dtype=np.int64)
    for c, b in zip(coeffs, basis):
        if c:
            out = F.add(out, F.mul(c, b))
    return out


def lincomb(F: Field, coeffs, basis):
    """sum_i coeffs[i] * basis[i] for stacked arrays basis."""
    coeffs = np.asarray(coeffs, dtype=np.int64)
    basis = np.asarray(basis, dtype=np.int64)
    if basis.shape[0] == 0:
        return np.zeros(basis.shape[1:], dtype=np.int64)
    return _lincomb(F, coeffs, basis)


# ---------------------------------------------------------------------------
# the public FMatrix facade


@dataclass(frozen=True)
class FMatrix:
    field: Field
    rows: int
    cols: int
    entries: tuple

    @classmethod
    def from_array(cls, field: Field, arr) -> "FMatrix":
        arr = np.asarray(arr, dtype=np.int64)
        if arr.ndim != 2:
            raise ShapeMismatch("FMatrix needs a 2-d array")
        flat = tuple(int(x) for x in arr.reshape(-1))
        for x in flat:
            if not 0 <= x < field.q:
                raise ValueError(f"entry {x} is not an element of {field}")
        return cls(field, arr.shape[0], arr.shape[1], flat)

    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64).reshape(self.rows, self.cols)

    def __matmul__(self, other: "FMatrix") -> "FMatrix":
        if self.field != other.field:
            raise ShapeMismatch("field mismatch")
        return FMatrix.from_array(self.field, self.field.matmul(self.array(), other.array()))

    def serialize(self) -> list:
        a = self.array()
        return [[self.field.serialize(x) for x in row] for row in a]


@dataclass(frozen=True)
class SolveResult:
    consistent: bool
    particular: Optional[FMatrix]
    nullspace: FMatrix


def linear_solve(A: FMatrix, mode: str, B: Optional[FMatrix] = None):
    """Dispatch on mode: 'rank', 'nullspace', 'solve' (needs B) or 'inverse'.

    Nullspace bases are returned as the rows of an FMatrix.
    """
    F = A.field
    arr = A.array()
    if mode == "rank":
        return rank(F, arr)
    if mode in ("nullspace", "nullspace-basis"):
        ns = nullspace(F, arr)
        return FMatrix.from_array(F, ns.reshape(-1, A.cols))
    if mode == "solve":
        if B is None:
            raise ShapeMismatch("solve mode needs a right-hand side")
        if B.rows != A.rows:
            raise ShapeMismatch(f"A has {A.rows} rows, B has {B.rows}")
        X, ns = solve(F, arr, B.array())
        ns_m = FMatrix.from_array(F, ns.reshape(-1, A.cols))
        if X is None:
            return SolveResult(False, None, ns_m)
        return SolveResult(True, FMatrix.from_array(F, X), ns_m)
    if mode == "inverse":
        if A.rows != A.cols:
            raise ShapeMismatch("inverse mode needs a square matrix")
        return FMatrix.from_array(F, inverse(F, arr))
    raise ValueError(f"unknown mode {mode!r}")
