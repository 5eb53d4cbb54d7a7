"""Prime-field arithmetic and dense linear algebra over F_q.

Field elements are Python ints or ``numpy.int64`` arrays with entries in
``[0, q)``.  A *packet* is a length-``v`` vector; collections of packets are
arrays whose last axis is the packet lane axis, and every linear-algebra
routine here acts on all lanes at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError, SingularSystemError

MAX_MODULUS = 2**31 - 1


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


def next_prime(m: int) -> int:
    """Smallest prime >= m (and >= 3)."""
    p = max(m, 3)
    while not is_prime(p):
        p += 1
    return p


@dataclass(frozen=True)
class Field:
    """The prime field F_q with 3 <= q <= 2**31 - 1."""

    q: int

    def __post_init__(self):
        if not isinstance(self.q, (int, np.integer)) or isinstance(self.q, bool):
            raise ParameterError(f"modulus must be an integer, got {self.q!r}")
        if self.q < 3 or self.q > MAX_MODULUS:
            raise ParameterError(f"modulus must lie in [3, 2^31-1], got {self.q}")
        if not is_prime(int(self.q)):
            raise ParameterError(f"modulus {self.q} is not prime")
        object.__setattr__(self, "q", int(self.q))

    # -- scalar ops ---------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.q

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.q

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.q

    def neg(self, a: int) -> int:
        return (-a) % self.q

    def inv(self, a: int) -> int:
        a = int(a) % self.q
        if a == 0:
            raise ZeroDivisionError("division by zero in field")
        return pow(a, self.q - 2, self.q)

    def div(self, a: int, b: int) -> int:
        return (a * self.inv(b)) % self.q

    # -- arrays ---------------------------------------------------------------

    def array(self, x) -> np.ndarray:
        return np.mod(np.asarray(x, dtype=np.int64), self.q)

    def zeros(self, shape) -> np.ndarray:
        return np.zeros(shape, dtype=np.int64)

    def random(self, rng: np.random.Generator, shape) -> np.ndarray:
        return rng.integers(0, self.q, size=shape, dtype=np.int64)

    def random_nonzero(self, rng: np.random.Generator, shape) -> np.ndarray:
        """Uniform draw over arrays of ``shape`` that are not identically zero."""
        while True:
            x = self.random(rng, shape)
            if np.any(x):
                return x

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        inner = a.shape[-1]
        # int64 accumulation is exact while inner * (q-1)^2 < 2^63
        if inner * (self.q - 1) ** 2 < 2**63:
            return (a @ b) % self.q
        va, vb = a.ndim == 1, b.ndim == 1
        a2 = a[None] if va else a
        b2 = b[:, None] if vb else b
        out = np.zeros(np.broadcast_shapes(a2.shape[:-1] + (1,), b2.shape[:-2] + (1, b2.shape[-1])),
                       dtype=np.int64)
        for t in range(inner):
            out = (out + (a2[..., :, t:t + 1] * b2[..., t:t + 1, :]) % self.q) % self.q
        if vb:
            out = out[..., 0]
        if va:
            out = out[..., 0, :] if not vb else out[..., 0]
        return out

    def dot(self, a, b) -> int:
        """Inner product of two element sequences (flattened)."""
        a = np.asarray(a, dtype=np.int64).ravel()
        b = np.asarray(b, dtype=np.int64).ravel()
        if a.shape != b.shape:
            raise ParameterError(f"length mismatch in dot: {a.size} vs {b.size}")
        return int(((a * b) % self.q).sum() % self.q)

    def powers(self, x: int, width: int) -> np.ndarray:
        out = np.empty(width, dtype=np.int64)
        acc = 1
        for c in range(width):
            out[c] = acc
            acc = (acc * x) % self.q
        return out

    def vandermonde(self, points: Sequence[int], width: int) -> np.ndarray:
        """Rows ``(1, x, x^2, ..., x^(width-1))`` for each evaluation point."""
        pts = [int(p) for p in points]
        if width < 1:
            raise ParameterError("vandermonde width must be >= 1")
        if len(pts) > self.q - 1:
            raise ParameterError("too many evaluation points for the field")
        if any(p % self.q == 0 for p in pts):
            raise ParameterError("evaluation points must be nonzero")
        if len({p % self.q for p in pts}) != len(pts):
            raise ParameterError("evaluation points must be distinct")
        if not pts:
            return np.zeros((0, width), dtype=np.int64)
        return np.stack([self.powers(p % self.q, width) for p in pts])

    # -- elimination ------------------------------------------------------

    def rref(self, a: np.ndarray) -> tuple[np.ndarray, list[int]]:
        """Reduced row echelon form and pivot columns."""
        m = self.array(a).copy()
        if m.ndim != 2:
            raise ParameterError("rref expects a 2-D matrix")
        rows, cols = m.shape
        pivots: list[int] = []
        r = 0
        q = self.q
        for c in range(cols):
            if r == rows:
                break
            nz = np.flatnonzero(m[r:, c])
            if nz.size == 0:
                continue
            p = r + int(nz[0])
            if p != r:
                m[[r, p]] = m[[p, r]]
            m[r] = (m[r] * self.inv(m[r, c])) % q
            col = m[:, c].copy()
            col[r] = 0
            m = (m - np.multiply.outer(col, m[r])) % q
            pivots.append(c)
            r += 1
        return m, pivots

    def rank(self, a) -> int:
        a = np.asarray(a)
        if a.size == 0:
            return 0
        return len(self.rref(a)[1])

    def solve_linear(self, a, b) -> np.ndarray:
        """Solve ``A x = b`` for square nonsingular ``A``.

        ``b`` is a vector or a matrix whose trailing axes are lanes; every lane
        is solved with the same elimination.
        """
        a = self.array(a)
        b = self.array(b)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ParameterError(f"coefficient matrix must be square, got {a.shape}")
        m = a.shape[0]
        if b.shape[0] != m:
            raise ParameterError("right-hand side length does not match the system")
        lanes = b.reshape(m, -1)
        aug = np.concatenate([a, lanes], axis=1)
        red, pivots = self.rref(aug)
        if pivots[:m] != list(range(m)) or len(pivots) < m:
            raise SingularSystemError()
        return red[:, m:].reshape(b.shape)

    def inv_matrix(self, a) -> np.ndarray:
        a = self.array(a)
        return self.solve_linear(a, np.eye(a.shape[0], dtype=np.int64))

    def solve_any(self, a, b) -> np.ndarray | None:
        """One solution of a possibly under-determined system, or None if inconsistent."""
        a = self.array(a)
        b = self.array(b).reshape(-1)
        rows, cols = a.shape
        red, pivots = self.rref(np.concatenate([a, b[:, None]], axis=1))
        if pivots and pivots[-1] == cols:
            return None
        x = np.zeros(cols, dtype=np.int64)
        for r, c in enumerate(pivots):
            x[c] = red[r, cols]
        return x

    def nullspace(self, a) -> np.ndarray:
        """Basis of the right kernel, one vector per row."""
        a = self.array(a)
        cols = a.shape[1]
        red, pivots = self.rref(a)
        free = [c for c in range(cols) if c not in pivots]
        basis = np.zeros((len(free), cols), dtype=np.int64)
        for i, f in enumerate(free):
            basis[i, f] = 1
            for r, c in enumerate(pivots):
                basis[i, c] = (-red[r, f]) % self.q
        return basis

    # -- polynomials (coefficient lists, lowest degree first) ---------------

    def poly_eval(self, coeffs: Sequence[int], x: int) -> int:
        acc = 0
        for c in reversed(coeffs):
            acc = (acc * x + int(c)) % self.q
        return acc

    def poly_divmod(self, num: Sequence[int], den: Sequence[int]) -> tuple[list[int], list[int]]:
        num = [int(c) % self.q for c in num]
        den = [int(c) % self.q for c in den]
        while den and den[-1] == 0:
            den.pop()
        if not den:
            raise ZeroDivisionError("division by zero polynomial")
        lead_inv = self.inv(den[-1])
        quot = [0] * max(len(num) - len(den) + 1, 1)
        rem = list(num)
        for i in range(len(num) - len(den), -1, -1):
            coef = (rem[i + len(den) - 1] * lead_inv) % self.q
            quot[i] = coef
            if coef:
                for j, dc in enumerate(den):
                    rem[i + j] = (rem[i + j] - coef * dc) % self.q
        rem = rem[: len(den) - 1] if len(den) > 1 else []
        return quot, rem

    def lagrange_matrix(self, points: Sequence[int], targets: Sequence[int]) -> np.ndarray:
        """Matrix ``L`` with ``L @ f(points) = f(targets)`` for deg f < len(points)."""
        pts = [int(p) % self.q for p in points]
        out = np.zeros((len(targets), len(pts)), dtype=np.int64)
        for ti, t in enumerate(targets):
            t = int(t) % self.q
            for i, xi in enumerate(pts):
                num, den = 1, 1
                for j, xj in enumerate(pts):
                    if j != i:
                        num = (num * (t - xj)) % self.q
                        den = (den * (xi - xj)) % self.q
                out[ti, i] = (num * self.inv(den)) % self.q
        return out
