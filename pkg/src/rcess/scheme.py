"""Reliable communication-efficient secret sharing: parameters, dealer, reconstructor."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from . import hashing, staircase
from .errors import (DecodingFailure, DetectionAbort, HashRecoveryError, ParameterError,
                     SingularSystemError, ZeroCapacityError)
from .field import Field
from .staircase import StaircaseParams

MODES = ("lk", "omniscient")
GRAPH_MODES = ("complete", "sparse")


@dataclass(frozen=True)
class SchemeParams:
    n: int
    k: int
    z_ro: int = 0
    z_wo: int = 0
    z_rw: int = 0
    q: int = 257
    v: int = 1
    mode: str = "lk"
    hash_graph: str = "complete"
    graph_seed: int = 0

    def __post_init__(self):
        for name in ("n", "k", "z_ro", "z_wo", "z_rw", "v", "q"):
            val = getattr(self, name)
            if not isinstance(val, (int, np.integer)) or isinstance(val, bool):
                raise ParameterError(f"{name} must be an integer")
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.hash_graph not in GRAPH_MODES:
            raise ParameterError(f"hash graph must be one of {GRAPH_MODES}")
        if min(self.z_ro, self.z_wo, self.z_rw) < 0:
            raise ParameterError("adversary counts must be non-negative")
        if not 1 <= self.k <= self.n:
            raise ParameterError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if not self.z_r < self.k:
            raise ParameterError(f"need z_r < k, got z_r={self.z_r}, k={self.k}")
        if self.v < 1:
            raise ParameterError("packet width v must be >= 1")
        Field(self.q)
        if self.q < self.n + 1:
            raise ParameterError(f"need q >= n+1 = {self.n + 1}, got q={self.q}")

    @property
    def z_r(self) -> int:
        return self.z_ro + self.z_rw

    @property
    def z_w(self) -> int:
        return self.z_wo + self.z_rw

    @cached_property
    def field(self) -> Field:
        return Field(self.q)

    @property
    def redundancy(self) -> int:
        """Extra contacted parties spent on the adversary: z_w (lk) or 2 z_w."""
        return self.z_w if self.mode == "lk" else 2 * self.z_w

    def condition(self) -> tuple[bool, str]:
        """Whether the capacity is positive, with the inequality spelled out."""
        if self.mode == "lk":
            rhs = 2 * self.z_rw + 2 * self.z_wo + self.z_ro
            text = f"k > 2*z_rw + 2*z_wo + z_ro ({self.k} > {rhs})"
        else:
            rhs = 3 * self.z_rw + 2 * self.z_wo + self.z_ro
            text = f"k > 3*z_rw + 2*z_wo + z_ro ({self.k} > {rhs})"
        return self.k > rhs, text

    @property
    def feasible(self) -> bool:
        return self.condition()[0]

    def require_feasible(self) -> None:
        ok, text = self.condition()
        if not ok:
            raise ZeroCapacityError(f"parameters admit no secret: violated {text}")

    @cached_property
    def staircase(self) -> StaircaseParams:
        self.require_feasible()
        r = self.redundancy
        return StaircaseParams(N=self.n, K=self.k - r, Z=self.z_r, D_max=self.n - r)

    @property
    def hashed(self) -> bool:
        return self.mode == "lk" and self.z_w > 0


@lru_cache(maxsize=256)
def hash_graph(params: SchemeParams) -> hashing.HashGraph:
    if params.hash_graph == "sparse":
        return hashing.build_sparse_graph(params.n, params.graph_seed)
    return hashing.complete_graph(params.n)


def capacity(params: SchemeParams) -> int:
    """Secret size in field elements (0 when the mode condition fails)."""
    if not params.feasible:
        return 0
    sp = params.staircase
    return (sp.K - sp.Z) * sp.alpha * params.v


def _level(params: SchemeParams, d: int) -> int:
    if not params.k <= d <= params.n:
        raise ParameterError(f"contact count d={d} outside [k, n] = [{params.k}, {params.n}]")
    return d - params.redundancy


def comm_cost(params: SchemeParams, d: int) -> int:
    """Payload elements downloaded (and read) when contacting ``d`` parties."""
    params.require_feasible()
    D = _level(params, d)
    return d * params.staircase.download(D) * params.v


def base_comm_cost(n: int, k: int, z: int, alpha: int, d: int) -> Fraction:
    """Minimum download of plain communication-efficient sharing: d (k-z) alpha / (d-z)."""
    if not k <= d <= n:
        raise ParameterError(f"d={d} outside [k, n]")
    return Fraction(d * (k - z) * alpha, d - z)


@dataclass(frozen=True)
class Response:
    """What one contacted party sends back."""

    party: int
    payload: np.ndarray
    hash_shares: np.ndarray | None = None

    @property
    def payload_elements(self) -> int:
        return int(self.payload.size)

    @property
    def hash_elements(self) -> int:
        return 0 if self.hash_shares is None else int(self.hash_shares.size)


@dataclass
class PartyState:
    party: int
    payload: np.ndarray
    hash_shares: np.ndarray | None = None

    def respond(self, n_cols: int, edges: Sequence[int] | None = None) -> Response:
        """Read the first ``n_cols`` packets (and their hash shares for ``edges``)."""
        hs = None
        if self.hash_shares is not None and edges is not None:
            hs = self.hash_shares[:n_cols][:, list(edges)].copy()
        return Response(self.party, self.payload[:n_cols].copy(), hs)


@dataclass
class ReconstructionReport:
    status: str
    secret: np.ndarray | None
    removed: tuple[int, ...] = ()
    payload_elements: int = 0
    hash_elements: int = 0
    per_party_read: dict[int, int] = dc_field(default_factory=dict)
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "removed": list(self.removed),
            "payload_elements": self.payload_elements,
            "hash_elements": self.hash_elements,
            "per_party_read": {str(k): v for k, v in sorted(self.per_party_read.items())},
            "detail": self.detail,
        }


def deal(params: SchemeParams, secret, rng: np.random.Generator) -> list[PartyState]:
    """Encode ``secret`` (exactly ``capacity(params)`` elements) into n party states."""
    if not params.feasible:
        raise ZeroCapacityError(f"parameters admit no secret: violated {params.condition()[1]}")
    F = params.field
    sp = params.staircase
    s = np.asarray(secret, dtype=np.int64).ravel()
    if s.size != capacity(params):
        raise ParameterError(f"secret must have {capacity(params)} elements, got {s.size}")
    if np.any((s < 0) | (s >= params.q)):
        raise ParameterError("secret elements must lie in [0, q)")
    keys = F.random(rng, (sp.key_len, params.v))
    M = staircase.build_message_matrix(sp, s.reshape(sp.secret_len, params.v), keys)
    W = staircase.encode(sp, M, F)
    hs = None
    if params.hashed:
        h = hashing.compute_hashes(F, W, hash_graph(params))
        hs = hashing.share_hashes(F, h, params.n, params.z_r, rng)
    return [PartyState(i + 1, W[i], None if hs is None else hs[i]) for i in range(params.n)]


def collect_responses(params: SchemeParams, states: Sequence[PartyState],
                      parties: Sequence[int]) -> list[Response]:
    """Ask ``parties`` for the data a user contacting exactly them downloads."""
    parties = sorted(int(p) for p in parties)
    n_cols = params.staircase.download(_level(params, len(parties)))
    edges = hash_graph(params).edges_within(parties) if params.hashed else None
    by_id = {s.party: s for s in states}
    return [by_id[p].respond(n_cols, edges) for p in parties]


def _validate(params: SchemeParams, responses: Sequence[Response]):
    ids = [r.party for r in responses]
    if len(set(ids)) != len(ids):
        raise ParameterError(f"duplicate party ids {ids}")
    if any(not 1 <= p <= params.n for p in ids):
        raise ParameterError(f"party ids must lie in 1..{params.n}")
    D = _level(params, len(ids))
    n_cols = params.staircase.download(D)
    m = len(hash_graph(params).edges_within(ids)) if params.hashed else 0
    for r in responses:
        if np.shape(r.payload) != (n_cols, params.v):
            raise ParameterError(f"party {r.party}: payload shape {np.shape(r.payload)}, "
                                 f"expected {(n_cols, params.v)}")
        if params.hashed and (r.hash_shares is None or np.shape(r.hash_shares) != (n_cols, m)):
            raise ParameterError(f"party {r.party}: hash shares missing or malformed")
    return D, n_cols


def reconstruct(params: SchemeParams, responses: Sequence[Response]) -> ReconstructionReport:
    """Recover the secret from the responses of the contacted parties."""
    params.require_feasible()
    responses = sorted(responses, key=lambda r: r.party)
    D, n_cols = _validate(params, responses)
    F = params.field
    sp = params.staircase
    report = ReconstructionReport(
        status="success", secret=None,
        payload_elements=sum(r.payload_elements for r in responses),
        hash_elements=sum(r.hash_elements for r in responses),
        per_party_read={r.party: r.payload_elements for r in responses},
    )
    try:
        if params.mode == "omniscient":
            pairs = [(r.party, r.payload) for r in responses]
            secret, bad = staircase.decode_with_errors(sp, F, pairs, params.z_w)
            report.removed = tuple(sorted(bad))
        else:
            survivors = [r.party for r in responses]
            if params.hashed:
                graph = hash_graph(params)
                verified = hashing.recover_hashes(
                    F, [(r.party, r.hash_shares) for r in responses], params.z_r, params.z_w)
                table = hashing.build_match_table(
                    F, [(r.party, r.payload) for r in responses], verified, graph, n_cols)
                survivors, removed = hashing.detect_corrupt(table, params.z_w)
                report.removed = tuple(removed)
                survivors = list(survivors)[:D]
            by_id = {r.party: r.payload for r in responses}
            ids = tuple(survivors)
            Y = np.stack([by_id[p] for p in ids]).reshape(D * n_cols, params.v)
            secret = F.matmul(staircase.erasure_decoder(sp, F, ids), Y)
    except (HashRecoveryError, DetectionAbort, DecodingFailure) as exc:
        report.status = "detected-abort"
        report.detail = str(exc)
        return report
    except SingularSystemError as exc:  # pragma: no cover - invariant violation
        report.status = "failure"
        report.detail = str(exc)
        return report
    report.secret = np.asarray(secret, dtype=np.int64).reshape(-1)
    return report
