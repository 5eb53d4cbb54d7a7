"""Universal Staircase codes: level structure, encoding and cascade decoding.

Layout conventions (0-indexed internally, party ``i`` evaluates at point
``i``):

* Levels ``j = 0..h-1`` have contact counts ``D_max, D_max-1, ..., K``.
  A user contacting ``D_j`` parties downloads columns ``0..alpha_j-1``.
* Block ``j`` spans columns ``alpha_{j-1}..alpha_j-1`` and has support rows
  ``0..D_j-1``.  Its top ``D_j - Z`` rows carry data (the secret for block 0,
  overflow of earlier columns otherwise); the next ``Z`` rows carry fresh keys.
* Every fill is column-major.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DecodingFailure, ParameterError, ZeroCapacityError
from .field import Field


@dataclass(frozen=True)
class StaircaseParams:
    N: int
    K: int
    Z: int
    D_max: int
    levels: tuple[int, ...] = dc_field(init=False)
    alpha: int = dc_field(init=False)
    alphas: tuple[int, ...] = dc_field(init=False)
    gammas: tuple[int, ...] = dc_field(init=False)

    def __post_init__(self):
        N, K, Z, D_max = self.N, self.K, self.Z, self.D_max
        if Z < 0:
            raise ParameterError("privacy threshold Z must be >= 0")
        if K <= Z:
            raise ZeroCapacityError(f"no secret capacity: K={K} <= Z={Z}")
        if D_max > N:
            raise ParameterError(f"D_max={D_max} exceeds N={N}")
        if D_max < K:
            raise ParameterError(f"D_max={D_max} is below K={K}")
        alpha = math.lcm(*(D - Z for D in range(K + 1, D_max + 1))) if D_max > K else 1
        levels = tuple(range(D_max, K - 1, -1))
        alphas = tuple((K - Z) * alpha // (D - Z) for D in levels)
        gammas = tuple(a - b for a, b in zip(alphas, (0,) + alphas[:-1]))
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "gammas", gammas)

    @property
    def h(self) -> int:
        return len(self.levels)

    @property
    def secret_len(self) -> int:
        return (self.K - self.Z) * self.alpha

    @property
    def key_len(self) -> int:
        return self.Z * self.alpha

    def level_index(self, D: int) -> int:
        if not self.K <= D <= self.D_max:
            raise ParameterError(f"contact count {D} is not a supported level {self.levels}")
        return self.D_max - D

    def columns(self, j: int) -> range:
        start = self.alphas[j - 1] if j > 0 else 0
        return range(start, self.alphas[j])

    def download(self, D: int) -> int:
        """Packets downloaded from each of ``D`` contacted parties."""
        return self.alphas[self.level_index(D)]

    @cached_property
    def layout(self) -> "_Layout":
        return _Layout.build(self)


@dataclass(frozen=True)
class _Layout:
    secret_rows: np.ndarray
    secret_cols: np.ndarray
    key_rows: np.ndarray
    key_cols: np.ndarray
    # per block j >= 1: (dst_rows, dst_cols, src_rows, src_cols)
    overflow: tuple[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray], ...]

    @staticmethod
    def build(p: StaircaseParams) -> "_Layout":
        def col_major(cols: Iterable[int], rows: range):
            pos = [(r, c) for c in cols for r in rows]
            return (np.array([r for r, _ in pos], dtype=np.intp),
                    np.array([c for _, c in pos], dtype=np.intp))

        secret = col_major(p.columns(0), range(0, p.levels[0] - p.Z))
        key_pos = [(r, c) for j in range(p.h) for c in p.columns(j)
                   for r in range(p.levels[j] - p.Z, p.levels[j])]
        overflow = []
        for j in range(1, p.h):
            Dj, Dprev = p.levels[j], p.levels[j - 1]
            dst = col_major(p.columns(j), range(0, Dj - p.Z))
            src = col_major(range(p.alphas[j - 1]), range(Dj, Dprev))
            if dst[0].size != src[0].size:  # pragma: no cover - guarded by the accounting identity
                raise AssertionError("staircase block accounting identity violated")
            overflow.append((dst[0], dst[1], src[0], src[1]))
        return _Layout(
            secret_rows=secret[0], secret_cols=secret[1],
            key_rows=np.array([r for r, _ in key_pos], dtype=np.intp),
            key_cols=np.array([c for _, c in key_pos], dtype=np.intp),
            overflow=tuple(overflow),
        )


def derive_params(N: int, K: int, Z: int, D_max: int) -> StaircaseParams:
    return StaircaseParams(N, K, Z, D_max)


def _as_packets(x, count: int, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] != count:
        raise ParameterError(f"{name} must hold exactly {count} packets, got shape {arr.shape}")
    return arr


def build_message_matrix(params: StaircaseParams, secret, keys) -> np.ndarray:
    """Message matrix of shape ``(N, alpha, v)``.

    ``secret`` holds ``(K-Z)*alpha`` packets and ``keys`` holds ``Z*alpha``
    packets, each as rows of a ``(count, v)`` array.
    """
    s = _as_packets(secret, params.secret_len, "secret")
    r = _as_packets(keys, params.key_len, "keys") if params.key_len else np.zeros((0, s.shape[1]), np.int64)
    if r.shape[1] != s.shape[1]:
        raise ParameterError("secret and keys must share the packet width")
    lay = params.layout
    m = np.zeros((params.N, params.alpha, s.shape[1]), dtype=np.int64)
    m[lay.secret_rows, lay.secret_cols] = s
    m[lay.key_rows, lay.key_cols] = r
    for dr, dc, sr, sc in lay.overflow:
        m[dr, dc] = m[sr, sc]
    return m


def encode(params: StaircaseParams, message: np.ndarray, field: Field) -> np.ndarray:
    """Shares of shape ``(N, alpha, v)``; party ``i`` evaluates every column at ``i``."""
    message = np.asarray(message, dtype=np.int64)
    if message.shape[:2] != (params.N, params.alpha):
        raise ParameterError(f"message matrix must have shape ({params.N}, {params.alpha}, v)")
    if params.N >= field.q:
        raise ParameterError(f"field F_{field.q} has too few nonzero points for N={params.N}")
    V = _vandermonde(field, tuple(range(1, params.N + 1)), params.N)
    flat = field.matmul(V, message.reshape(params.N, -1))
    return flat.reshape(message.shape)


@lru_cache(maxsize=4096)
def _vandermonde(field: Field, points: tuple[int, ...], width: int) -> np.ndarray:
    v = field.vandermonde(points, width)
    v.setflags(write=False)
    return v


@lru_cache(maxsize=4096)
def _vandermonde_inverse(field: Field, points: tuple[int, ...]) -> np.ndarray:
    inv = field.inv_matrix(field.vandermonde(points, len(points)))
    inv.setflags(write=False)
    return inv


def _stack_responses(responses, n_cols: int) -> tuple[tuple[int, ...], np.ndarray]:
    pairs = list(responses.items()) if isinstance(responses, dict) else list(responses)
    ids = tuple(int(pid) for pid, _ in pairs)
    if len(set(ids)) != len(ids):
        raise ParameterError(f"duplicate party ids in {ids}")
    blocks = []
    for pid, packets in pairs:
        arr = np.asarray(packets, dtype=np.int64)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.shape[0] != n_cols:
            raise ParameterError(f"party {pid} sent {arr.shape[0]} packets, expected {n_cols}")
        blocks.append(arr)
    if len({b.shape for b in blocks}) > 1:
        raise ParameterError("responses disagree on packet width")
    return ids, np.stack(blocks)


def _cascade(params, field, points, Y, D, solve_block):
    """Decode blocks from the contacted level down to block 0.

    ``Y`` has shape ``(len(points), alpha_j, L)``; ``solve_block`` maps the
    residual of a block (rows beyond ``D`` already removed) to its top ``D``
    message rows.
    """
    j = params.level_index(D)
    n_cols = params.alphas[j]
    lanes = Y.shape[2]
    M = np.zeros((params.N, n_cols, lanes), dtype=np.int64)
    V = _vandermonde(field, tuple(points), params.N)
    lay = params.layout
    for t in range(j, -1, -1):
        cols = params.columns(t)
        c0, c1 = cols.start, cols.stop
        Dt = params.levels[t]
        resid = Y[:, c0:c1, :]
        if Dt > D:
            known = M[D:Dt, c0:c1, :].reshape(Dt - D, -1)
            resid = (resid - field.matmul(V[:, D:Dt], known).reshape(resid.shape)) % field.q
        M[:D, c0:c1, :] = solve_block(resid)
        if t >= 1:
            dr, dc, sr, sc = lay.overflow[t - 1]
            M[sr, sc] = M[dr, dc]
    return M


def decode_erasure(params: StaircaseParams, field: Field, responses) -> np.ndarray:
    """Recover the secret packets from ``D`` honest responses.

    ``responses`` is a sequence of ``(party_id, packets)`` pairs (or a dict),
    each carrying exactly the first ``alpha_j`` packets for ``D = D_j``.
    """
    pairs = list(responses.items()) if isinstance(responses, dict) else list(responses)
    D = len(pairs)
    n_cols = params.download(D)
    ids, Y = _stack_responses(pairs, n_cols)
    Vinv = _vandermonde_inverse(field, ids)

    def solve_block(resid):
        return field.matmul(Vinv, resid.reshape(D, -1)).reshape(resid.shape)

    M = _cascade(params, field, ids, Y, D, solve_block)
    lay = params.layout
    return M[lay.secret_rows, lay.secret_cols]


@lru_cache(maxsize=4096)
def erasure_decoder(params: StaircaseParams, field: Field, parties: tuple[int, ...]) -> np.ndarray:
    """Linear map ``R`` with ``secret = R @ Y.reshape(D*alpha_j, v)``.

    Built by running the cascade on unit inputs, so it is exactly the cascade
    for that contact set.
    """
    D = len(parties)
    n_cols = params.download(D)
    size = D * n_cols
    unit = np.eye(size, dtype=np.int64).reshape(D, n_cols, size)
    secret = decode_erasure(params, field, list(zip(parties, unit)))
    R = np.ascontiguousarray(secret.reshape(params.secret_len, size))
    R.setflags(write=False)
    return R


# -- error correction --------------------------------------------------------


def berlekamp_welch(field: Field, xs: Sequence[int], ys: Sequence[int], k: int, e: int) -> list[int]:
    """Coefficients of the unique deg < k polynomial within distance e of (xs, ys).

    Raises DecodingFailure when no such polynomial exists.
    """
    d = len(xs)
    if d < k + 2 * e:
        raise ParameterError(f"need at least k+2e={k + 2 * e} points, got {d}")
    q = field.q
    ys = [int(y) % q for y in ys]
    if e == 0:
        coeffs = field.solve_linear(field.vandermonde(xs[:k], k), ys[:k]).tolist()
        if any(field.poly_eval(coeffs, x) != y for x, y in zip(xs, ys)):
            raise DecodingFailure()
        return coeffs
    rows = []
    rhs = []
    for x, y in zip(xs, ys):
        xp = [pow(int(x), t, q) for t in range(k + e)]
        rows.append(xp + [(-y * xp[t]) % q for t in range(e)])
        rhs.append((y * pow(int(x), e, q)) % q)
    sol = field.solve_any(np.array(rows, dtype=np.int64), np.array(rhs, dtype=np.int64))
    if sol is None:
        raise DecodingFailure()
    Q = sol[: k + e].tolist()
    E = sol[k + e:].tolist() + [1]
    P, rem = field.poly_divmod(Q, E)
    if any(rem) or any(P[k:]):
        raise DecodingFailure()
    P = (P + [0] * k)[:k]
    wrong = sum(field.poly_eval(P, x) != y for x, y in zip(xs, ys))
    if wrong > e:
        raise DecodingFailure()
    return P


def exhaustive_correct(field: Field, xs: Sequence[int], Y: np.ndarray, k: int, e: int) -> np.ndarray:
    """Reference corrector: try every error support of size <= e.

    ``Y`` has shape ``(d, L)`` (one received word per lane); returns the
    ``(k, L)`` coefficient matrix.  Intended for d <= 12.
    """
    d = len(xs)
    Y = np.asarray(Y, dtype=np.int64)
    lanes = Y.shape[1]
    out = np.zeros((k, lanes), dtype=np.int64)
    done = np.zeros(lanes, dtype=bool)
    Vfull = field.vandermonde(xs, k)
    for size in range(e + 1):
        for support in itertools.combinations(range(d), size):
            keep = [i for i in range(d) if i not in support]
            basis = keep[:k]
            coeffs = field.matmul(field.inv_matrix(Vfull[basis]), Y[basis])
            pred = field.matmul(Vfull, coeffs)
            ok = np.all(pred[keep] == Y[keep], axis=0) & ~done
            out[:, ok] = coeffs[:, ok]
            done |= ok
            if done.all():
                return out
    raise DecodingFailure()


def decode_with_errors(params: StaircaseParams, field: Field, responses, e: int,
                       method: str = "bw") -> tuple[np.ndarray, set[int]]:
    """Cascade decode tolerating up to ``e`` arbitrarily corrupted responses.

    Uses ``d = D_j + 2e`` responses.  Returns the secret packets and the set of
    party ids whose data disagreed with the decoded codeword.
    """
    if method not in ("bw", "exhaustive"):
        raise ParameterError(f"unknown correction method {method!r}")
    pairs = list(responses.items()) if isinstance(responses, dict) else list(responses)
    d = len(pairs)
    D = d - 2 * e
    n_cols = params.download(D)
    ids, Y = _stack_responses(pairs, n_cols)
    Vk = field.vandermonde(ids, D)
    first_inv = _vandermonde_inverse(field, ids[:D])
    bad: set[int] = set()

    def solve_block(resid):
        flat = resid.reshape(d, -1)
        coeffs = field.matmul(first_inv, flat[:D])
        pred = field.matmul(Vk, coeffs)
        clean = np.all(pred == flat, axis=0)
        for lane in np.flatnonzero(~clean):
            if method == "bw":
                c = berlekamp_welch(field, ids, flat[:, lane].tolist(), D, e)
                coeffs[:, lane] = c
            else:
                coeffs[:, lane] = exhaustive_correct(field, ids, flat[:, lane:lane + 1], D, e)[:, 0]
        pred = field.matmul(Vk, coeffs)
        wrong = np.any(pred != flat, axis=1)
        bad.update(ids[i] for i in np.flatnonzero(wrong))
        return coeffs.reshape((D,) + resid.shape[1:])

    M = _cascade(params, field, ids, Y, D, solve_block)
    lay = params.layout
    return M[lay.secret_rows, lay.secret_cols], bad


def key_observation_matrix(params: StaircaseParams, field: Field, parties: Sequence[int]) -> np.ndarray:
    """Linear map from keys to the shares of ``parties`` when the secret is 0.

    Shape ``(len(parties) * alpha, Z * alpha)``.
    """
    kl = params.key_len
    secret = np.zeros((params.secret_len, kl), dtype=np.int64)
    keys = np.eye(kl, dtype=np.int64)
    W = encode(params, build_message_matrix(params, secret, keys), field)
    rows = [p - 1 for p in parties]
    return W[rows].reshape(len(rows) * params.alpha, kl)
