import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ltelab.detector import (
    DetectionConfig,
    KnnModel,
    TrainingSet,
    classify,
    distance,
    fit_normalization,
    generate_samples,
    run_detection_experiment,
    synth_pm_counters,
)
from ltelab.harness import RunConfig, run_scenario
from ltelab.interference import InterferenceScenario


def oracle(points, labels, categories, x, k):
    """Exhaustive sort + majority vote, written without numpy."""
    d = sorted((math.dist(p, x), i) for i, p in enumerate(points))[:k]
    votes = Counter(labels[i] for _, i in d)
    top = max(votes.values())
    tied = [c for c in categories if votes.get(c) == top]
    if len(tied) == 1:
        return tied[0]
    nearest = {c: min(dist for dist, i in d if labels[i] == c) for c in tied}
    return min(tied, key=lambda c: (nearest[c], categories.index(c)))


def toy():
    pts = [(0, 0), (0, 1), (1, 0), (10, 10), (10, 11), (11, 10)]
    return TrainingSet(np.array(pts, float), ["A"] * 3 + ["B"] * 3, ("A", "B"))


class TestExamples:
    def test_toy_queries(self):
        m = KnnModel.fit(toy(), k=3)
        assert classify(m, [0.5, 0.5]) == "A"
        assert classify(m, [10.5, 10.5]) == "B"

    def test_exact_match_k1(self):
        m = KnnModel.fit(toy(), k=1)
        assert m.classify([10, 11]) == "B" and m.classify([1, 0]) == "A"

    def test_distance(self):
        assert distance([0, 0], [3, 4]) == 5.0
        assert distance([0, 0], [3, 4], "manhattan") == 7.0
        assert distance([1.5, 2], [1.5, 2]) == 0.0
        with pytest.raises(ValueError):
            distance([0, 0], [1, 2, 3])

    def test_errors(self):
        with pytest.raises(ValueError):
            KnnModel.fit(toy(), k=7)
        with pytest.raises(ValueError):
            KnnModel.fit(toy(), k=0)
        with pytest.raises(ValueError):
            KnnModel.fit(toy()).classify([1, 2, 3])

    def test_tie_goes_to_nearest_class(self):
        t = TrainingSet(np.array([[0.0], [3.0], [10.0]]), ["A", "B", "B"], ("A", "B"))
        # k=2 around 1.0: one A at distance 1, one B at distance 2
        assert KnnModel.fit(t, k=2).classify([1.0]) == "A"
        assert KnnModel.fit(t, k=2).classify([2.0]) == "B"

    def test_exact_tie_lowest_category(self):
        t = TrainingSet(np.array([[-1.0], [1.0]]), ["B", "A"], ("A", "B"))
        assert KnnModel.fit(t, k=2).classify([0.0]) == "A"


class TestOracle:
    @pytest.mark.parametrize("k", [1, 3, 5])
    def test_thousand_random_queries(self, k):
        rng = np.random.default_rng(100 + k)
        mismatches = 0
        for trial in range(10):
            n = int(rng.integers(k, 40))
            pts = rng.normal(size=(n, 2)) * rng.uniform(0.5, 3)
            labels = list(rng.choice(["I", "N"], size=n))
            model = KnnModel.fit(TrainingSet(pts, labels, ("I", "N")), k=k)
            for x in rng.normal(size=(100, 2)) * 2:
                mismatches += model.classify(x) != oracle(pts.tolist(), labels, ["I", "N"], x, k)
        assert mismatches == 0

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from([1, 3, 5]))
    def test_property(self, seed, k):
        rng = np.random.default_rng(seed)
        pts = rng.integers(-3, 4, size=(12, 2)).astype(float)  # lots of exact ties
        labels = list(rng.choice(["a", "b", "c"], size=12))
        model = KnnModel.fit(TrainingSet(pts, labels, ("a", "b", "c")), k=k)
        x = rng.integers(-3, 4, size=2).astype(float)
        # on exact distance ties at rank k the oracle's (distance, index) sort is the same rule
        assert model.classify(x) == oracle(pts.tolist(), labels, ["a", "b", "c"], x, k)


class TestInvariances:
    def test_k1_is_nearest(self):
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(30, 2))
        labels = [f"c{i % 3}" for i in range(30)]
        m = KnnModel.fit(TrainingSet(pts, labels, ("c0", "c1", "c2")), k=1)
        for x in rng.normal(size=(50, 2)):
            assert m.classify(x) == labels[int(np.argmin(np.linalg.norm(pts - x, axis=1)))]

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_permutation(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.normal(size=(25, 2))
        labels = np.array(rng.choice(["I", "N"], size=25))
        perm = rng.permutation(25)
        a = KnnModel.fit(TrainingSet(pts, labels, ("I", "N")), k=3)
        b = KnnModel.fit(TrainingSet(pts[perm], labels[perm], ("I", "N")), k=3)
        qs = rng.normal(size=(40, 2))
        assert a.classify_many(qs) == b.classify_many(qs)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3), st.integers(0, 1))
    def test_scale_with_normalization(self, seed, scale, feature):
        rng = np.random.default_rng(seed)
        pts = rng.normal(size=(25, 2))
        labels = list(rng.choice(["I", "N"], size=25))
        qs = rng.normal(size=(40, 2))
        s = np.ones(2)
        s[feature] = scale
        a = KnnModel.fit(TrainingSet(pts, labels, ("I", "N")), k=3, normalize=True)
        b = KnnModel.fit(TrainingSet(pts * s, labels, ("I", "N")), k=3, normalize=True)
        assert a.classify_many(qs) == b.classify_many(qs * s)


class TestNormalization:
    def test_constant_feature(self):
        t = TrainingSet(np.array([[1.0, 7.0], [3.0, 7.0], [5.0, 7.0]]), ["A", "A", "B"], ("A", "B"))
        n = fit_normalization(t)
        assert n.scale[1] == 1.0 and n.offset[1] == 7.0

    def test_standardizes(self):
        rng = np.random.default_rng(2)
        x = rng.normal(5, 2, size=(200, 2))
        n = fit_normalization(TrainingSet(x, ["A"] * 200, ("A",)))
        z = n.apply(x)
        np.testing.assert_allclose(z.mean(axis=0), 0, atol=1e-12)
        np.testing.assert_allclose(z.std(axis=0), 1, atol=1e-12)
        n2 = fit_normalization(TrainingSet(z, ["A"] * 200, ("A",)))
        np.testing.assert_allclose(n2.apply(z), z, atol=1e-12)


class TestTrainingSet:
    def test_csv_round_trip(self, tmp_path):
        t = toy()
        text = t.to_csv(tmp_path / "t.csv")
        assert text.splitlines()[0] == "metric_1,metric_2,label"
        back = TrainingSet.from_csv(tmp_path / "t.csv")
        np.testing.assert_array_equal(back.features, t.features)
        assert list(back.labels) == list(t.labels)

    def test_validation(self):
        with pytest.raises(ValueError):
            TrainingSet(np.zeros((2, 2)), ["A"], ("A",))
        with pytest.raises(ValueError):
            TrainingSet(np.zeros((2, 2)), ["A", "Z"], ("A",))


class TestPmCounters:
    def test_clean_baseline(self):
        r, _ = run_scenario(RunConfig(), InterferenceScenario.of(0))
        f = synth_pm_counters(r)
        assert f[0] < 1e-15 and f[1] == 0.0

    def test_pucch_raises_both(self):
        clean = synth_pm_counters(run_scenario(RunConfig(), InterferenceScenario.of(0))[0])
        jam = synth_pm_counters(run_scenario(RunConfig(), InterferenceScenario.of(3), 5.0)[0])
        assert np.all(jam > clean)

    def test_seeded(self):
        r, _ = run_scenario(RunConfig(), InterferenceScenario.of(3), 5.0)
        a = synth_pm_counters(r, 7, 0.1)
        assert np.array_equal(a, synth_pm_counters(r, 7, 0.1))
        assert not np.array_equal(a, synth_pm_counters(r, 8, 0.1))


class TestExperiment:
    def test_default_perfect(self):
        rep = run_detection_experiment()
        assert rep.accuracy == 1.0
        assert rep.confusion == ((4, 0), (0, 4))
        assert rep.displaced_index is not None
        assert rep.predictions[rep.displaced_index] == "Interference"

    def test_deterministic(self):
        assert run_detection_experiment().to_json() == run_detection_experiment().to_json()

    def test_huge_noise_is_chance(self):
        accs = [run_detection_experiment(DetectionConfig(noise_sd=100.0, seed=s, n_per_class=50,
                                                         displaced_fraction=0)).accuracy
                for s in range(40)]
        assert abs(np.mean(accs) - 0.5) < 0.05

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            run_detection_experiment(DetectionConfig(n_per_class=1))

    def test_samples_balanced(self):
        s = generate_samples(DetectionConfig(n_per_class=7))
        assert Counter(s.labels) == {"Interference": 7, "NoInterference": 7}
