import numpy as np
import pytest

from oracles import ncc_direct
from ratfm.dataset import Window
from ratfm.errors import (
    EmptyPoolError,
    InconsistentWindowLengthError,
    InvalidFractionError,
    LengthMismatchError,
    ZeroNormVectorError,
)
from ratfm.retrieval import CandidatePool, build_pool, ncc_max, retrieve_best, subsample_pool


def win(sid, start, inp, fut=(0.0, 0.0)):
    return Window(series_id=sid, start=start, input=np.asarray(inp, float),
                  future=np.asarray(fut, float))


class TestNccMax:
    def test_self_similarity(self):
        r = ncc_max([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert r.score == pytest.approx(1.0, abs=1e-12)
        assert r.best_lag == 0

    def test_shifted_impulse(self):
        r = ncc_max([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
        assert r.score == pytest.approx(1.0, abs=1e-12)
        assert r.best_lag == -1

    def test_negative_pair_matches_oracle(self):
        x = np.array([1.0, 2.0])
        y = np.array([-2.0, -4.0])
        expected_score, expected_lag = ncc_direct(x, y)
        r = ncc_max(x, y)
        assert r.score == pytest.approx(expected_score, abs=1e-12)
        assert r.best_lag == expected_lag == -1

    def test_matches_direct_oracle_random(self):
        rng = np.random.default_rng(11)
        for _ in range(60):
            L = int(rng.integers(2, 64))
            x = rng.normal(size=L)
            y = rng.normal(size=L)
            score, lag = ncc_direct(x, y)
            r = ncc_max(x, y)
            assert abs(r.score - score) < 1e-9
            assert r.best_lag == lag

    def test_scaled_copy_scores_one(self):
        rng = np.random.default_rng(41)
        x = rng.normal(size=32)
        r = ncc_max(x, 2.5 * x)
        assert r.score == pytest.approx(1.0, abs=1e-12)
        assert r.best_lag == 0

    def test_scaled_shifted_copy_scores_one(self):
        # zero-padding truncates shifted content, so the score reaches 1
        # at a lag only when the lost tail is zero
        rng = np.random.default_rng(41)
        x = rng.normal(size=32)
        x[-3:] = 0.0
        y = np.zeros(32)
        y[3:] = 2.5 * x[:-3]
        r = ncc_max(x, y)
        assert r.score == pytest.approx(1.0, abs=1e-9)
        assert r.best_lag == -3

    def test_scale_invariance(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=40)
        y = rng.normal(size=40)
        base = ncc_max(x, y).score
        for a, b in [(2.0, 3.0), (0.01, 250.0), (7.5, 0.3)]:
            assert ncc_max(a * x, b * y).score == pytest.approx(base, abs=1e-9)

    def test_score_bounded_property(self):
        rng = np.random.default_rng(17)
        for _ in range(1000):
            L = int(rng.integers(2, 40))
            r = ncc_max(rng.normal(size=L), rng.normal(size=L))
            assert -1.0 <= r.score <= 1.0

    def test_lag_zero_only(self):
        x = np.array([1.0, 0.0, 0.0])
        y = np.array([0.0, 1.0, 0.0])
        r = ncc_max(x, y, lag_zero_only=True)
        assert r.score == pytest.approx(0.0, abs=1e-12)
        assert r.best_lag == 0

    def test_errors(self):
        with pytest.raises(LengthMismatchError):
            ncc_max([1.0, 2.0], [1.0, 2.0, 3.0])
        with pytest.raises(LengthMismatchError):
            ncc_max([1.0], [1.0])
        with pytest.raises(ZeroNormVectorError):
            ncc_max([0.0, 0.0], [1.0, 2.0])


class TestRetrieveBest:
    def test_exact_copy_wins(self):
        rng = np.random.default_rng(2)
        q = win("query", 0, rng.normal(size=16))
        entries = [win(f"c{i}", 0, rng.normal(size=16)) for i in range(4)]
        entries.insert(2, win("twin", 0, q.input.copy(), fut=(9.0, 9.0)))
        pool = CandidatePool(domain="d", entries=entries)
        best, sim = retrieve_best(q, pool)
        assert best.series_id == "twin"
        assert sim.score == pytest.approx(1.0, abs=1e-9)
        assert sim.candidate_index == 2
        assert np.array_equal(best.future, [9.0, 9.0])

    def test_singleton_pool(self):
        rng = np.random.default_rng(3)
        q = win("q", 0, rng.normal(size=8))
        only = win("other", 0, rng.normal(size=8))
        best, _ = retrieve_best(q, CandidatePool(domain="d", entries=[only]))
        assert best is only

    def test_matches_exhaustive_argmax(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            q = win("q", 0, rng.normal(size=24))
            entries = [win(f"c{i}", 0, rng.normal(size=24)) for i in range(5)]
            pool = CandidatePool(domain="d", entries=entries)
            scores = [ncc_direct(q.input, e.input)[0] for e in entries]
            best, sim = retrieve_best(q, pool)
            assert sim.candidate_index == int(np.argmax(scores))
            assert sim.score == pytest.approx(max(scores), abs=1e-9)

    def test_never_returns_own_series(self):
        rng = np.random.default_rng(29)
        q = win("mine", 0, rng.normal(size=12))
        entries = [win("mine", 0, q.input.copy()), win("other", 0, rng.normal(size=12))]
        best, _ = retrieve_best(q, CandidatePool(domain="d", entries=entries))
        assert best.series_id == "other"

    def test_empty_pool(self):
        q = win("q", 0, np.ones(4))
        with pytest.raises(EmptyPoolError):
            retrieve_best(q, CandidatePool(domain="d", entries=[]))
        with pytest.raises(EmptyPoolError):
            retrieve_best(q, CandidatePool(domain="d", entries=[win("q", 0, np.ones(4))]))

    def test_inconsistent_window_length(self):
        q = win("q", 0, np.ones(4))
        pool = CandidatePool(domain="d", entries=[win("o", 0, np.ones(6))])
        with pytest.raises(InconsistentWindowLengthError):
            retrieve_best(q, pool)

    def test_ragged_pool_rejected(self):
        q = win("q", 0, np.ones(4))
        pool = CandidatePool(
            domain="d", entries=[win("a", 0, np.ones(4)), win("b", 0, np.ones(6))]
        )
        with pytest.raises(InconsistentWindowLengthError):
            retrieve_best(q, pool)

    def test_zero_norm_query(self):
        pool = CandidatePool(domain="d", entries=[win("o", 0, np.ones(4))])
        with pytest.raises(ZeroNormVectorError):
            retrieve_best(win("q", 0, np.zeros(4)), pool)


class TestSubsample:
    def _pool(self, n):
        rng = np.random.default_rng(1)
        return build_pool("d", [win(f"s{i}", i, rng.normal(size=8)) for i in range(n)])

    def test_quarter_of_hundred(self):
        sub = subsample_pool(self._pool(100), 0.25, seed=0)
        assert len(sub) == 25

    def test_identity_fraction(self):
        pool = self._pool(10)
        sub = subsample_pool(pool, 1.0, seed=99)
        assert [e.series_id for e in sub.entries] == [e.series_id for e in pool.entries]

    def test_deterministic(self):
        pool = self._pool(50)
        a = subsample_pool(pool, 0.5, seed=7)
        b = subsample_pool(pool, 0.5, seed=7)
        assert [e.series_id for e in a.entries] == [e.series_id for e in b.entries]

    def test_order_preserved(self):
        pool = self._pool(30)
        sub = subsample_pool(pool, 0.4, seed=3)
        positions = [int(e.series_id[1:]) for e in sub.entries]
        assert positions == sorted(positions)

    def test_invalid_fraction(self):
        pool = self._pool(5)
        for f in (0.0, -0.5, 1.5):
            with pytest.raises(InvalidFractionError):
                subsample_pool(pool, f, seed=0)

    def test_ceil_size_and_metadata(self):
        sub = subsample_pool(self._pool(10), 0.11, seed=4)
        assert len(sub) == 2  # ceil(1.1)
        assert sub.fraction == 0.11 and sub.seed == 4
