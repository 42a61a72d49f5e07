import numpy as np
import pytest

import oracles
from theftsentry.correlate import mic
from theftsentry.errors import ParameterError
from theftsentry.fdi import FdiParams, FdiType, apply_fdi
from theftsentry.meterdata import (
    AreaDataset,
    ConsumerSeries,
    DayProfile,
    compute_ntl,
    normalize_profile,
    observer_from_truth,
    synth_ground_truth,
)
from theftsentry.pipeline import (
    SuspicionRanking,
    combine_ranks,
    detect,
    rank_consumers,
    score_mic,
    score_pcc,
    score_zeta,
    split_two_groups,
    suspicion_degree,
)


class TestSplit:
    def test_clear_two_groups(self):
        sus, normal = split_two_groups([0.1, 0.12, 0.11, 0.9, 0.85])
        assert sorted(sus) == [0.85, 0.9]
        assert sorted(normal) == [0.1, 0.11, 0.12]

    def test_all_equal_single_cluster(self):
        sus, normal = split_two_groups([5.0, 5.0, 5.0, 5.0])
        assert sus.tolist() == [5, 5, 5, 5] and normal.size == 0

    def test_pair_splits_upward(self):
        sus, normal = split_two_groups([1.0, 2.0])
        assert sus.tolist() == [2.0] and normal.tolist() == [1.0]

    def test_matches_exhaustive_sse(self, rng):
        for _ in range(40):
            m = int(rng.integers(2, 20))
            v = np.round(rng.random(m) * 3, 2)
            if np.all(v == v[0]):
                continue
            sus, normal = split_two_groups(v)
            o_sus, o_normal = oracles.exhaustive_two_means(v)
            assert sorted(sus) == sorted(o_sus)
            assert sorted(normal) == sorted(o_normal)

    def test_needs_two_values(self):
        with pytest.raises(ParameterError):
            split_two_groups([1.0])


class TestSuspicionDegree:
    def test_mean_of_upper_group(self):
        assert suspicion_degree([0.1, 0.1, 0.9, 0.9]) == pytest.approx(0.9)

    def test_all_masked_scores_zero(self):
        assert suspicion_degree([0.5, 0.7], degenerate=[True, True]) == 0.0

    def test_masked_entries_excluded(self):
        assert suspicion_degree(
            [9.0, 0.1, 0.9, 0.9], degenerate=[True, False, False, False]
        ) == pytest.approx(0.9)

    def test_single_survivor(self):
        assert suspicion_degree([0.3], degenerate=None) == pytest.approx(0.3)

    def test_monotone_in_suspicious_values(self, rng):
        for _ in range(60):
            v = rng.random(int(rng.integers(3, 12)))
            base = suspicion_degree(v)
            sus, _ = split_two_groups(v)
            target = np.flatnonzero(v == sus.max())[0]
            bumped = v.copy()
            bumped[target] += rng.random() * 0.5
            assert suspicion_degree(bumped) >= base - 1e-12


class TestRanking:
    def test_sorted_order(self):
        r = rank_consumers([0.2, 0.9, 0.5])
        assert r.ranks.tolist() == [1.0, 3.0, 2.0]

    def test_average_rank_on_ties(self):
        assert rank_consumers([0.5, 0.5]).ranks.tolist() == [1.5, 1.5]

    def test_rank_sum_identity(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 30))
            degrees = np.round(rng.random(n), 1)
            r = rank_consumers(degrees)
            assert r.ranks.sum() == pytest.approx(n * (n + 1) / 2)

    def test_invariant_under_increasing_transform(self, rng):
        degrees = rng.random(25)
        a = rank_consumers(degrees)
        b = rank_consumers(np.exp(3 * degrees))
        assert np.array_equal(a.ranks, b.ranks)


class TestCombine:
    def make(self, ranks):
        ranks = np.asarray(ranks, dtype=float)
        ids = [f"c{i}" for i in range(ranks.size)]
        return SuspicionRanking(ids, ranks.copy(), ranks)

    def test_arith_and_geo_values(self):
        r1 = self.make([2.0, 1.0])
        r2 = self.make([8.0, 1.0])
        arith = combine_ranks(r1, r2, "arith")
        geo = combine_ranks(r1, r2, "geo")
        assert arith.degrees.tolist() == [5.0, 1.0]
        assert geo.degrees.tolist() == [4.0, 1.0]

    def test_idempotent_on_equal_rankings(self, rng):
        ranks = rank_consumers(rng.random(12)).ranks
        r = self.make(ranks)
        combined = combine_ranks(r, r, "arith")
        assert np.array_equal(combined.ranks, ranks)

    def test_geo_below_arith(self, rng):
        r1 = self.make(rank_consumers(rng.random(15)).ranks)
        r2 = self.make(rank_consumers(rng.random(15)).ranks)
        arith = combine_ranks(r1, r2, "arith").degrees
        geo = combine_ranks(r1, r2, "geo").degrees
        assert np.all(geo <= arith + 1e-12)
        equal = np.isclose(geo, arith)
        assert np.array_equal(equal, r1.ranks == r2.ranks)

    def test_consumer_sets_must_match(self):
        r1 = self.make([1.0, 2.0])
        r2 = SuspicionRanking(["x", "y"], np.array([1.0, 2.0]), np.array([1.0, 2.0]))
        with pytest.raises(ParameterError):
            combine_ranks(r1, r2)


def benign_area(n=5, m=4, T=24, seed=3):
    consumers = synth_ground_truth(n, m, T, seed=seed)
    return AreaDataset(consumers, observer_from_truth(consumers))


def area_with_fdi1_thief(seed, n=6, m=8, T=48, alpha=0.4, thief=2):
    consumers = synth_ground_truth(n, m, T, seed=seed)
    observer = observer_from_truth(consumers)
    tampered = []
    for i, c in enumerate(consumers):
        if i == thief:
            days = [apply_fdi(d, FdiParams(FdiType.FDI1, alpha=alpha)) for d in c.days]
            tampered.append(ConsumerSeries(c.consumer_id, days, ground_truth=list(c.days)))
        else:
            tampered.append(c)
    return AreaDataset(tampered, observer), consumers[thief].consumer_id


class TestScoreMic:
    def test_clean_area_fully_masked(self):
        area = benign_area()
        sm = score_mic(area)
        assert sm.scores.shape == (5, 4)
        assert sm.degenerate.all()
        assert not sm.scores.any()

    def test_entries_match_scalar_mic(self):
        area, _ = area_with_fdi1_thief(seed=21, n=4, m=3, T=24)
        ntl = compute_ntl(area)
        sm = score_mic(area)
        for i, c in enumerate(area.consumers):
            for j in range(area.m):
                if sm.degenerate[i, j]:
                    continue
                u = normalize_profile(c.days[j]).values
                assert sm.scores[i, j] == mic(u, ntl[j])

    def test_thief_days_stand_out(self):
        hits = 0
        trials = 100
        for seed in range(trials):
            area, thief_id = area_with_fdi1_thief(seed=seed + 1000, m=8)
            sm = score_mic(area)
            row = sm.scores[area.consumer_ids.index(thief_id)]
            # all days are tampered here, so compare against the benign rows
            others = sm.scores[
                [i for i, cid in enumerate(area.consumer_ids) if cid != thief_id]
            ]
            if np.median(row) > np.median(others):
                hits += 1
        assert hits >= 90

    def test_tampered_day_beats_own_clean_days(self):
        hits = 0
        trials = 100
        for seed in range(trials):
            consumers = synth_ground_truth(6, 8, 48, seed=seed + 2000)
            observer = observer_from_truth(consumers)
            thief = 1
            tampered_day = 3
            rebuilt = []
            for i, c in enumerate(consumers):
                if i == thief:
                    days = list(c.days)
                    days[tampered_day] = apply_fdi(
                        days[tampered_day], FdiParams(FdiType.FDI1, alpha=0.4)
                    )
                    rebuilt.append(ConsumerSeries(c.consumer_id, days))
                else:
                    rebuilt.append(c)
            sm = score_mic(AreaDataset(rebuilt, observer))
            row = sm.scores[thief]
            clean = np.delete(row, tampered_day)
            if row[tampered_day] > np.median(clean):
                hits += 1
        assert hits >= 90


class TestScoreZeta:
    def test_flat_line_among_peaked_profiles(self, rng):
        consumers = synth_ground_truth(10, 6, 48, seed=12)
        days = list(consumers[4].days)
        days[2] = DayProfile(np.full(48, 0.8) + rng.random(48) * 1e-3)
        consumers[4] = ConsumerSeries(consumers[4].consumer_id, days)
        area = AreaDataset(consumers, observer_from_truth(consumers))
        sz = score_zeta(area)
        assert sz.scores.shape == (10, 6)
        cutoff = np.quantile(sz.scores.ravel(), 0.95)
        assert sz.scores[4, 2] >= cutoff

    def test_lone_shape_gets_max_zeta(self):
        base = np.tile(np.linspace(1, 2, 8), (30, 1))
        base[13] = np.linspace(2, 1, 8)  # one reversed profile
        consumers = [
            ConsumerSeries(f"c{i}", [DayProfile(base[i])]) for i in range(30)
        ]
        area = AreaDataset(consumers, observer_from_truth(consumers))
        sz = score_zeta(area)
        assert int(np.argmax(sz.scores[:, 0])) == 13
        assert (sz.scores[:, 0] == sz.scores[13, 0]).sum() == 1

    def test_degenerate_days_masked_and_zero(self):
        consumers = synth_ground_truth(4, 3, 8, seed=5)
        zero_day = [DayProfile(np.zeros(8))] + list(consumers[0].days[1:])
        consumers[0] = ConsumerSeries(consumers[0].consumer_id, zero_day)
        area = AreaDataset(consumers, observer_from_truth(consumers))
        sz = score_zeta(area)
        assert sz.degenerate[0, 0] and sz.scores[0, 0] == 0.0
        assert not sz.degenerate[1:].any()

    def test_per_area_flag(self):
        a1 = benign_area(seed=1)
        a2 = benign_area(seed=2)
        pooled = score_zeta([a1, a2])
        split = score_zeta([a1, a2], per_area=True)
        assert pooled.scores.shape == split.scores.shape == (10, 4)
        assert not np.array_equal(pooled.scores, split.scores)

    def test_degenerate_pool_rejected(self):
        from theftsentry.errors import DegenerateDataError

        zero = [DayProfile(np.zeros(6)), DayProfile(np.zeros(6))]
        consumers = [ConsumerSeries("a", zero), ConsumerSeries("b", list(zero))]
        area = AreaDataset(consumers, [DayProfile(np.zeros(6)), DayProfile(np.zeros(6))])
        with pytest.raises(DegenerateDataError):
            score_zeta(area)


class TestDetect:
    def test_method_selection_controls_columns(self, tmp_path, small_scenario):
        areas, _ = small_scenario
        only_mic = detect(areas, ["mic"])
        assert set(only_mic.rankings) == {"mic"}
        p = tmp_path / "ranking.csv"
        only_mic.to_csv(p)
        header = p.read_text().splitlines()[0]
        assert header == "consumer_id,mic_degree,mic_rank"

        full = detect(areas, ["mic", "cfsfdp", "pcc", "arith", "geo"])
        full.to_csv(p)
        header = p.read_text().splitlines()[0]
        assert header == (
            "consumer_id,mic_degree,mic_rank,zeta_degree,zeta_rank,"
            "pcc_degree,pcc_rank,combined_arith,combined_geo"
        )

    def test_unknown_method_rejected(self, small_scenario):
        areas, _ = small_scenario
        with pytest.raises(ParameterError):
            detect(areas, ["mic", "lof"])

    def test_deterministic_output(self, tmp_path, small_scenario):
        areas, _ = small_scenario
        p1, p2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
        detect(areas, ["mic", "cfsfdp", "arith"]).to_csv(p1)
        detect(areas, ["mic", "cfsfdp", "arith"]).to_csv(p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_combined_requires_both_and_gets_them(self, small_scenario):
        areas, _ = small_scenario
        res = detect(areas, ["arith"])
        assert set(res.rankings) == {"arith"}
        assert res.timings["arith"] > 0

    def test_thief_tops_mic_ranking_usually(self):
        hits = 0
        trials = 100
        for seed in range(trials):
            area, thief_id = area_with_fdi1_thief(seed=seed + 3000, n=8, m=10)
            res = detect(area, ["mic"])
            ranking = res.rankings["mic"]
            thief_pos = ranking.consumer_ids.index(thief_id)
            if ranking.ranks[thief_pos] == ranking.ranks.max():
                hits += 1
        assert hits >= 80

    def test_pcc_scores_match_scalar(self):
        from theftsentry.correlate import pcc as scalar_pcc

        area, _ = area_with_fdi1_thief(seed=77, n=4, m=3, T=24)
        ntl = compute_ntl(area)
        sp = score_pcc(area)
        for i, c in enumerate(area.consumers):
            for j in range(area.m):
                if sp.degenerate[i, j]:
                    continue
                u = normalize_profile(c.days[j]).values
                assert sp.scores[i, j] == pytest.approx(scalar_pcc(u, ntl[j]), abs=1e-12)
