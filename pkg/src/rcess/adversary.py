"""Adversary placement, corruption strategies, and the Monte Carlo trial runner.

Limited-knowledge strategies receive a :class:`View` that only exposes the
states of the parties they read.  They return :class:`Tamper` records which
the harness applies to stored states, so a strategy never touches honest data.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, field as dc_field, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import scheme, staircase
from .errors import KnowledgeViolation, ParameterError
from .field import Field
from .scheme import PartyState, SchemeParams


@dataclass(frozen=True)
class AdversaryPlacement:
    read_only: tuple[int, ...] = ()
    write_only: tuple[int, ...] = ()
    read_write: tuple[int, ...] = ()

    @property
    def readable(self) -> tuple[int, ...]:
        return tuple(sorted(self.read_only + self.read_write))

    @property
    def writable(self) -> tuple[int, ...]:
        return tuple(sorted(self.write_only + self.read_write))

    def validate(self, params: SchemeParams, exact: bool = True) -> None:
        """Sizes must equal (z_ro, z_wo, z_rw), or stay within them if not ``exact``."""
        sizes = (len(self.read_only), len(self.write_only), len(self.read_write))
        limits = (params.z_ro, params.z_wo, params.z_rw)
        if (sizes != limits) if exact else any(s > m for s, m in zip(sizes, limits)):
            raise ParameterError(f"placement sizes {sizes} do not fit "
                                 f"(z_ro, z_wo, z_rw) = {limits}")
        every = self.read_only + self.write_only + self.read_write
        if len(set(every)) != len(every):
            raise ParameterError("placement sets must be disjoint")
        if any(not 1 <= p <= params.n for p in every):
            raise ParameterError(f"placement parties must lie in 1..{params.n}")


def sample_placement(params: SchemeParams, rng: np.random.Generator) -> AdversaryPlacement:
    """Uniform over disjoint placements with the parameter sizes."""
    perm = [int(p) + 1 for p in rng.permutation(params.n)]
    a, b = params.z_ro, params.z_ro + params.z_wo
    c = b + params.z_rw
    return AdversaryPlacement(tuple(sorted(perm[:a])), tuple(sorted(perm[a:b])),
                              tuple(sorted(perm[b:c])))


class View:
    """Read access to the states an adversary is allowed to observe."""

    def __init__(self, states: Sequence[PartyState], readable: Sequence[int], omniscient: bool = False):
        self._states = {s.party: s for s in states}
        self.readable = tuple(sorted(self._states)) if omniscient else tuple(sorted(readable))
        self.omniscient = omniscient

    def state(self, party: int) -> PartyState:
        if party not in self.readable:
            raise KnowledgeViolation(f"strategy tried to read party {party} outside its read set")
        return self._states[party]


@dataclass(frozen=True)
class Tamper:
    """Change to one party's stored state: ``add`` offsets or ``set`` replacements."""

    party: int
    kind: str = "add"
    payload: np.ndarray | None = None
    hash_shares: np.ndarray | None = None

    def apply(self, st: PartyState, q: int) -> PartyState:
        if self.kind not in ("add", "set"):
            raise ParameterError(f"unknown tamper kind {self.kind!r}")
        payload, hs = st.payload, st.hash_shares
        if self.payload is not None:
            payload = (payload + self.payload) % q if self.kind == "add" else self.payload % q
        if self.hash_shares is not None and hs is not None:
            hs = (hs + self.hash_shares) % q if self.kind == "add" else self.hash_shares % q
        return PartyState(st.party, payload, hs)


def apply_tampers(states: Sequence[PartyState], tampers: dict[int, Tamper], q: int) -> list[PartyState]:
    return [tampers[s.party].apply(s, q) if s.party in tampers else s for s in states]


def _nonzero_rows(field: Field, rng: np.random.Generator, rows: int, v: int) -> np.ndarray:
    """One uniformly random nonzero length-v packet per row."""
    out = field.random(rng, (rows, v))
    zero = ~out.any(axis=1)
    while zero.any():
        out[zero] = field.random(rng, (int(zero.sum()), v))
        zero = ~out.any(axis=1)
    return out


Strategy = Callable[[SchemeParams, AdversaryPlacement, View, np.random.Generator], dict]


def blind_additive(params, placement, view, rng):
    """Add a nonzero random packet to every column of each written party."""
    F = params.field
    alpha = params.staircase.alpha
    return {p: Tamper(p, "add", _nonzero_rows(F, rng, alpha, params.v))
            for p in placement.writable}


def fake_secret(params, placement, view, rng):
    """Re-deal a random fake secret consistent with the read-only parties' shares.

    Read-write parties then store the fake shares.  Write-only parties cannot
    see anything and fall back to blind additive errors.
    """
    F = params.field
    sp = params.staircase
    out = blind_additive(params, replace(placement, read_write=()), view, rng)
    if not placement.read_write:
        return out
    G = _generator(params)                          # (n*alpha, S+Kz)
    alpha = sp.alpha
    ro = list(placement.read_only)
    rows = [(p - 1) * alpha + c for p in ro for c in range(alpha)]
    A = G[rows]
    null = F.nullspace(A) if rows else np.eye(G.shape[1], dtype=np.int64)
    lanes = []
    for lane in range(params.v):
        if rows:
            obs = np.concatenate([view.state(p).payload[:, lane] for p in ro])
            x0 = F.solve_any(A, obs)
        else:
            x0 = np.zeros(G.shape[1], dtype=np.int64)
        coef = F.random(rng, null.shape[0])
        lanes.append((x0 + F.matmul(coef, null)) % F.q if null.size else x0)
    X = np.stack(lanes, axis=1)                     # (S+Kz, v)
    W = F.matmul(G, X).reshape(params.n, alpha, params.v)
    for p in placement.read_write:
        view.state(p)
        out[p] = Tamper(p, "set", W[p - 1])
    return out


def hash_targeted(params, placement, view, rng):
    """Blind payload errors plus random offsets on every stored hash share."""
    out = blind_additive(params, placement, view, rng)
    m = len(scheme.hash_graph(params).edges)
    if not params.hashed:
        return out
    F = params.field
    return {p: Tamper(p, "add", t.payload, _nonzero_rows(F, rng, params.staircase.alpha, m))
            for p, t in out.items()}


def orthogonal_search(params, placement, view, rng):
    """Errors orthogonal, column by column, to every packet the adversary can read.

    Pairs with observed parties then keep matching; other pairs are a guess.
    Falls back to a random nonzero packet when no orthogonal one exists.
    """
    F = params.field
    alpha = params.staircase.alpha
    seen = [view.state(p).payload for p in placement.readable]
    out = {}
    for p in placement.writable:
        others = [w for r, w in zip(placement.readable, seen) if r != p]
        err = _nonzero_rows(F, rng, alpha, params.v)
        if others:
            for c in range(alpha):
                basis = F.nullspace(np.stack([w[c] for w in others]))
                if basis.shape[0]:
                    vec = F.matmul(F.random_nonzero(rng, basis.shape[0]), basis)
                    if vec.any():
                        err[c] = vec
        out[p] = Tamper(p, "add", err)
    return out


STRATEGIES: dict[str, Strategy] = {
    "blind_additive": blind_additive,
    "fake_secret": fake_secret,
    "hash_targeted": hash_targeted,
    "orthogonal_search": orthogonal_search,
}


def _generator(params: SchemeParams) -> np.ndarray:
    """Matrix taking (secret, keys) element vectors to all n*alpha share symbols."""
    return _generator_cached(params.staircase, params.field)


@lru_cache(maxsize=64)
def _generator_cached(sp, F: Field) -> np.ndarray:
    width = sp.secret_len + sp.key_len
    eye = np.eye(width, dtype=np.int64)
    M = staircase.build_message_matrix(sp, eye[:sp.secret_len], eye[sp.secret_len:])
    W = staircase.encode(sp, M, F)                  # (N, alpha, width)
    return W.reshape(sp.N * sp.alpha, width)


def corrupt(strategy: str, params: SchemeParams, placement: AdversaryPlacement,
            states: Sequence[PartyState], rng: np.random.Generator,
            exact: bool = True) -> list[PartyState]:
    """Run ``strategy`` under the knowledge model and return the tampered states."""
    if strategy not in STRATEGIES:
        raise ParameterError(f"unknown strategy {strategy!r}; choose from {sorted(STRATEGIES)}")
    placement.validate(params, exact)
    view = View(states, placement.readable, omniscient=params.mode == "omniscient")
    tampers = STRATEGIES[strategy](params, placement, view, rng)
    if set(tampers) - set(placement.writable):
        raise KnowledgeViolation("strategy tried to write outside its write set")
    return apply_tampers(states, tampers, params.q)


@dataclass
class TrialStats:
    trials: int = 0
    success: int = 0
    detected_abort: int = 0
    undetected: int = 0
    failure: int = 0
    removed_writer: int = 0

    def __add__(self, other: "TrialStats") -> "TrialStats":
        return TrialStats(*(a + b for a, b in zip(astuple(self), astuple(other))))

    @property
    def undetected_rate(self) -> float:
        return self.undetected / self.trials if self.trials else 0.0

    def wilson(self, confidence: float = 0.95) -> tuple[float, float]:
        from statsmodels.stats.proportion import proportion_confint
        lo, hi = proportion_confint(self.undetected, self.trials, alpha=1 - confidence, method="wilson")
        return float(lo), float(hi)

    def to_dict(self) -> dict:
        lo, hi = self.wilson()
        return {
            "trials": self.trials, "success": self.success,
            "detected_abort": self.detected_abort, "undetected": self.undetected,
            "failure": self.failure, "removed_writer": self.removed_writer,
            "undetected_rate": self.undetected_rate, "wilson95": [lo, hi],
        }


def _contact_set(params, placement, d, rng, contact):
    if contact == "random":
        return sorted(int(p) + 1 for p in rng.permutation(params.n)[:d])
    if contact != "writers":
        raise ParameterError(f"unknown contact policy {contact!r}")
    writers = list(placement.writable)[:d]
    rest = [p for p in range(1, params.n + 1) if p not in writers]
    fill = rng.permutation(len(rest))[:d - len(writers)]
    return sorted(writers + [rest[i] for i in fill])


def run_trials(params: SchemeParams, strategy: str, d: int, trials: int, seed: int, *,
               placement: AdversaryPlacement | None = None, contact: str = "writers",
               start: int = 0) -> TrialStats:
    """Deal, corrupt, reconstruct and classify ``trials`` independent times.

    Trial ``i`` draws everything from ``SeedSequence(seed, spawn_key=(i,))``,
    so any split of the index range (via ``start``) gives the same
    aggregate counts.
    ``contact="writers"`` always contacts the written parties (the harder
    case); ``"random"`` draws a uniform d-subset.
    """
    params.require_feasible()
    cap = scheme.capacity(params)
    stats = TrialStats()
    for i in range(start, start + trials):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        secret = params.field.random(rng, cap)
        states = scheme.deal(params, secret, rng)
        pl = placement if placement is not None else sample_placement(params, rng)
        bad = corrupt(strategy, params, pl, states, rng)
        parties = _contact_set(params, pl, d, rng, contact)
        report = scheme.reconstruct(params, scheme.collect_responses(params, bad, parties))
        stats.trials += 1
        if report.status == "success":
            if np.array_equal(report.secret, secret):
                stats.success += 1
            else:
                stats.undetected += 1
            if set(report.removed) & set(pl.writable):
                stats.removed_writer += 1
        elif report.status == "detected-abort":
            stats.detected_abort += 1
        else:
            stats.failure += 1
    return stats


def level_bound(params: SchemeParams, d: int) -> float:
    """Undetected-error bound (1/q)^(n-d+1); zero in the omniscient model or without writers."""
    if params.mode == "omniscient" or params.z_w == 0:
        return 0.0
    return (1.0 / params.q) ** (params.n - d + 1)


@dataclass
class BoundReport:
    bound: float
    rate: float
    sigma: float
    threshold: float
    wilson95: tuple[float, float]
    fake_secret_bound: float
    passed: bool
    extra: dict = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"bound": self.bound, "rate": self.rate, "sigma": self.sigma,
                "threshold": self.threshold, "wilson95": list(self.wilson95),
                "fake_secret_bound": self.fake_secret_bound, "passed": self.passed}


def compare_to_bound(stats: TrialStats, params: SchemeParams, d: int) -> BoundReport:
    """Check the empirical undetected rate against bound + 3 binomial sigma."""
    b = level_bound(params, d)
    sigma = math.sqrt(b * (1 - b) / stats.trials) if stats.trials else 0.0
    threshold = b + 3 * sigma
    cap = scheme.capacity(params)
    fake = min(1.0, float(params.q) ** (-(cap - params.z_wo - params.z_rw)))
    rate = stats.undetected_rate
    passed = stats.undetected == 0 if b == 0 else rate <= threshold
    return BoundReport(b, rate, sigma, threshold, stats.wilson(), fake, passed)
