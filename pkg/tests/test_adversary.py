import math

import numpy as np
import pytest

from rcess import adversary as ad
from rcess import scheme as sm
from rcess.errors import KnowledgeViolation, ParameterError

EX = sm.SchemeParams(4, 3, z_rw=1, q=5)
P1 = ad.AdversaryPlacement(read_write=(1,))


def dealt(params, seed=0):
    rng = np.random.default_rng(seed)
    secret = params.field.random(rng, sm.capacity(params))
    return secret, sm.deal(params, secret, rng)


class RecordingView(ad.View):
    touched: list = []

    def state(self, party):
        RecordingView.touched.append(party)
        return super().state(party)


# placements

def test_placement_validation():
    P1.validate(EX)
    for bad in [ad.AdversaryPlacement(), ad.AdversaryPlacement(read_write=(1, 2)),
                ad.AdversaryPlacement(read_write=(5,)),
                ad.AdversaryPlacement(write_only=(1,))]:
        with pytest.raises(ParameterError):
            bad.validate(EX)
    p = sm.SchemeParams(6, 5, z_ro=1, z_rw=1, q=7)
    with pytest.raises(ParameterError, match="disjoint"):
        ad.AdversaryPlacement(read_only=(2,), read_write=(2,)).validate(p)
    ad.AdversaryPlacement(read_write=(3,)).validate(p, exact=False)


def test_sample_placement_uniform():
    p = sm.SchemeParams(5, 4, z_ro=1, z_rw=1, q=7)
    rng = np.random.default_rng(0)
    counts = {}
    for _ in range(4000):
        pl = ad.sample_placement(p, rng)
        pl.validate(p)
        counts[(pl.read_only, pl.read_write)] = counts.get((pl.read_only, pl.read_write), 0) + 1
    assert len(counts) == 20
    assert max(counts.values()) < 2 * min(counts.values())


# knowledge model

@pytest.mark.parametrize("strategy", sorted(ad.STRATEGIES))
def test_knowledge_confinement(strategy, monkeypatch):
    monkeypatch.setattr(ad, "View", RecordingView)
    p = sm.SchemeParams(6, 5, z_ro=1, z_rw=1, q=7)
    for seed in range(20):
        RecordingView.touched = []
        rng = np.random.default_rng(seed)
        pl = ad.sample_placement(p, rng)
        _, states = dealt(p, seed)
        out = ad.corrupt(strategy, p, pl, states, rng)
        assert set(RecordingView.touched) <= set(pl.readable)
        for a, b in zip(states, out):
            if a.party not in pl.writable:
                assert a is b


def test_reading_honest_party_raises(monkeypatch):
    def peek(params, placement, view, rng):
        view.state(4)
        return {}
    monkeypatch.setitem(ad.STRATEGIES, "peek", peek)
    _, states = dealt(EX)
    with pytest.raises(KnowledgeViolation):
        ad.corrupt("peek", EX, P1, states, np.random.default_rng(0))


def test_writing_outside_write_set_raises(monkeypatch):
    def stray(params, placement, view, rng):
        return {2: ad.Tamper(2, "add", np.ones((2, 1), dtype=np.int64))}
    monkeypatch.setitem(ad.STRATEGIES, "stray", stray)
    _, states = dealt(EX)
    with pytest.raises(KnowledgeViolation):
        ad.corrupt("stray", EX, P1, states, np.random.default_rng(0))


def test_omniscient_view_sees_everything():
    p = sm.SchemeParams(5, 4, z_wo=1, q=7, mode="omniscient")
    _, states = dealt(p)
    v = ad.View(states, (), omniscient=True)
    assert v.readable == (1, 2, 3, 4, 5)
    assert v.state(3) is states[2]


def test_unknown_strategy_and_tamper():
    _, states = dealt(EX)
    with pytest.raises(ParameterError):
        ad.corrupt("nope", EX, P1, states, np.random.default_rng(0))
    with pytest.raises(ParameterError):
        ad.Tamper(1, "xor", np.zeros((2, 1))).apply(states[0], 5)


# strategies

def test_blind_additive_changes_every_column():
    p = sm.SchemeParams(7, 5, z_wo=1, z_rw=1, q=11, v=3)
    rng = np.random.default_rng(1)
    for _ in range(30):
        pl = ad.sample_placement(p, rng)
        _, states = dealt(p, int(rng.integers(1 << 30)))
        out = ad.corrupt("blind_additive", p, pl, states, rng)
        for a, b in zip(states, out):
            changed = np.any(a.payload != b.payload, axis=1)
            assert changed.all() if a.party in pl.writable else not changed.any()


def test_read_only_placement_changes_nothing():
    p = sm.SchemeParams(5, 3, z_ro=2, q=7)
    _, states = dealt(p)
    pl = ad.AdversaryPlacement(read_only=(1, 2))
    for name in ad.STRATEGIES:
        out = ad.corrupt(name, p, pl, states, np.random.default_rng(0))
        assert all(np.array_equal(a.payload, b.payload) for a, b in zip(states, out))


def test_fake_secret_consistent_with_reads():
    p = sm.SchemeParams(6, 5, z_ro=1, z_rw=1, q=7, v=2)
    pl = ad.AdversaryPlacement(read_only=(2,), read_write=(5,))
    G = ad._generator(p)
    alpha = p.staircase.alpha
    for seed in range(10):
        secret, states = dealt(p, seed)
        out = ad.corrupt("fake_secret", p, pl, states, np.random.default_rng(seed))
        # the substituted share is a valid share of some message that also
        # explains the read-only party's share exactly
        rows = [(q_ - 1) * alpha + c for q_ in (2, 5) for c in range(alpha)]
        target = np.concatenate([states[1].payload, out[4].payload])
        for lane in range(p.v):
            assert p.field.solve_any(G[rows], target[:, lane]) is not None
        assert np.array_equal(out[1].payload, states[1].payload)


def test_fake_secret_removed_often():
    stats = ad.run_trials(EX, "fake_secret", 4, 2000, 3, placement=P1)
    assert stats.failure == 0
    assert stats.removed_writer / stats.trials >= 1 - 3 / EX.q


def test_hash_targeted_touches_hash_shares():
    _, states = dealt(EX)
    out = ad.corrupt("hash_targeted", EX, P1, states, np.random.default_rng(0))
    # every column of hash shares is moved by a nonzero offset
    assert np.all(np.any(out[0].hash_shares != states[0].hash_shares, axis=1))
    stats = ad.run_trials(EX, "hash_targeted", 4, 1000, 5, placement=P1)
    assert stats.failure == 0
    assert stats.undetected_rate <= 0.2 + 3 * math.sqrt(0.16 / 1000)


def test_orthogonal_search_keeps_observed_pairs_matching():
    p = sm.SchemeParams(5, 4, z_ro=1, z_rw=1, q=7, v=2)
    pl = ad.AdversaryPlacement(read_only=(2,), read_write=(4,))
    F = p.field
    for seed in range(20):
        _, states = dealt(p, seed)
        out = ad.corrupt("orthogonal_search", p, pl, states, np.random.default_rng(seed))
        err = (out[3].payload - states[3].payload) % p.q
        assert np.all(err.any(axis=1))
        for c in range(p.staircase.alpha):
            assert F.dot(err[c], states[1].payload[c]) == 0


# trial runner

def test_no_adversary_never_wrong():
    p = sm.SchemeParams(5, 3, z_ro=1, q=7)
    for d in (3, 4, 5):
        stats = ad.run_trials(p, "blind_additive", d, 200, d)
        assert stats.undetected == 0 and stats.success == 200


def test_counts_sum_and_determinism():
    a = ad.run_trials(EX, "blind_additive", 3, 300, 42)
    b = ad.run_trials(EX, "blind_additive", 3, 300, 42)
    assert a == b
    assert a.success + a.detected_abort + a.undetected + a.failure == a.trials == 300


def test_split_runs_add_up():
    whole = ad.run_trials(EX, "blind_additive", 4, 120, 7, contact="random")
    parts = [ad.run_trials(EX, "blind_additive", 4, 40, 7, contact="random", start=s)
             for s in (0, 40, 80)]
    assert parts[0] + parts[1] + parts[2] == whole


def test_classification_soundness(monkeypatch):
    # a reconstructor that always returns the wrong secret counts as undetected
    def wrong(params, responses):
        return sm.ReconstructionReport("success", np.full(sm.capacity(params), -1))
    monkeypatch.setattr(sm, "reconstruct", wrong)
    s = ad.run_trials(EX, "blind_additive", 4, 10, 0)
    assert s.undetected == 10 and s.success == 0

    def abort(params, responses):
        return sm.ReconstructionReport("detected-abort", None)
    monkeypatch.setattr(sm, "reconstruct", abort)
    s = ad.run_trials(EX, "blind_additive", 4, 10, 0)
    assert s.detected_abort == 10 and s.undetected == 0


def test_omniscient_exhaustive_never_undetected():
    p = sm.SchemeParams(4, 3, z_wo=1, q=5, mode="omniscient")
    stats = ad.run_trials(p, "blind_additive", 4, 300, 1)
    assert stats.undetected == 0 and stats.success == 300
    stats = ad.run_trials(p, "blind_additive", 3, 300, 2)
    assert stats.undetected == 0 and stats.success == 300


def test_contact_policy():
    rng = np.random.default_rng(0)
    for _ in range(50):
        got = ad._contact_set(EX, P1, 3, rng, "writers")
        assert 1 in got and len(got) == 3
        got = ad._contact_set(EX, P1, 3, rng, "random")
        assert len(set(got)) == 3
    with pytest.raises(ParameterError):
        ad._contact_set(EX, P1, 3, rng, "all")


# bounds

def test_level_bound_values():
    assert ad.level_bound(EX, 4) == pytest.approx(0.2)
    assert ad.level_bound(EX, 3) == pytest.approx(0.04)
    p = sm.SchemeParams(6, 4, z_rw=1, q=11)
    assert ad.level_bound(p, 6) == pytest.approx(1 / 11)
    assert ad.level_bound(p, 4) == pytest.approx((1 / 11) ** 3)
    assert ad.level_bound(sm.SchemeParams(4, 2, q=5), 3) == 0.0


def test_wilson_matches_closed_form():
    s = ad.TrialStats(trials=1000, success=990, undetected=10)
    lo, hi = s.wilson()
    z = 1.959963984540054
    ph, n = 0.01, 1000
    centre = (ph + z * z / (2 * n)) / (1 + z * z / n)
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / (1 + z * z / n)
    assert lo == pytest.approx(centre - half) and hi == pytest.approx(centre + half)


def test_compare_to_bound_report():
    s = ad.TrialStats(trials=10_000, success=9_000, detected_abort=900, undetected=100)
    r = ad.compare_to_bound(s, EX, 4)
    assert r.bound == pytest.approx(0.2) and r.passed
    assert r.threshold == pytest.approx(0.2 + 3 * math.sqrt(0.16 / 10_000))
    # q^-(capacity - z_wo - z_rw) = 5^-1
    assert r.fake_secret_bound == pytest.approx(0.2)
    bad = ad.TrialStats(trials=100, success=50, undetected=50)
    assert not ad.compare_to_bound(bad, EX, 4).passed


def test_six_party_blind_below_bound():
    p = sm.SchemeParams(6, 4, z_rw=1, q=11)
    stats = ad.run_trials(p, "blind_additive", 6, 10_000, 2026)
    report = ad.compare_to_bound(stats, p, 6)
    assert report.bound == pytest.approx(1 / 11)
    assert report.passed and stats.failure == 0
