import numpy as np
import pytest

import ciukit as ck


class TestSeededRng:
    def test_same_key_same_stream(self):
        a = ck.SeededRng(42).generator().uniform(size=10)
        b = ck.SeededRng(42).generator().uniform(size=10)
        assert np.array_equal(a, b)

    def test_spawn_paths_are_distinct(self):
        base = ck.SeededRng(42)
        a = base.spawn(0).generator().uniform(size=10)
        b = base.spawn(1).generator().uniform(size=10)
        c = base.spawn(0, 1).generator().uniform(size=10)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_spawn_is_reproducible(self):
        assert ck.SeededRng(7).spawn(3, 1) == ck.SeededRng(7).spawn(3).spawn(1)

    def test_negative_seed_rejected(self):
        with pytest.raises(ck.ConfigError):
            ck.SeededRng(-1)

    def test_as_rng_coercions(self):
        assert ck.as_rng(5) == ck.SeededRng(5)
        assert ck.as_rng(None) == ck.SeededRng(0)
        r = ck.SeededRng(9, (1,))
        assert ck.as_rng(r) is r
        with pytest.raises(ck.ConfigError):
            ck.as_rng("42")


class TestSampleSets:
    def test_numeric_contains_source_and_endpoints(self, linear_bundle):
        _, space, _ = linear_bundle
        x = space.instance([0.5, 0.5, 0.5, 0.5])
        s = ck.build_sample_set(space, x, 0, n=2, rng=1)
        assert len(s.instances) == 5
        assert s.instances[0] == x
        assert s.source_position == 0
        varied = s.varied_values
        assert varied[0] == 0.5 and varied[1] == 0.0 and varied[2] == 1.0
        assert all(0.0 <= v <= 1.0 for v in varied)

    def test_numeric_n0_is_three_points(self, linear_bundle):
        _, space, _ = linear_bundle
        x = space.instance([0.2, 0.4, 0.6, 0.8])
        s = ck.build_sample_set(space, x, 2, n=0)
        assert len(s.instances) == 3
        assert s.varied_values == (0.6, 0.0, 1.0)

    def test_only_varied_feature_changes(self, linear_bundle):
        _, space, _ = linear_bundle
        x = space.instance([0.1, 0.2, 0.3, 0.4])
        s = ck.build_sample_set(space, x, 1, n=50, rng=3)
        for inst in s.instances:
            for j in (0, 2, 3):
                assert inst.values[j] == x.values[j]

    def test_categorical_levels_once_each(self):
        space = ck.FeatureSpace(
            (
                ck.FeatureSpec.categorical("c", ["a", "b", "d"]),
                ck.FeatureSpec.numeric("x", 0, 1),
            )
        )
        x = space.instance(["b", 0.3])
        s = ck.build_sample_set(space, x, 0, n=100, rng=1)
        assert len(s.instances) == 3
        assert s.varied_values == ("a", "b", "d")
        assert s.instances[s.source_position].values[0] == "b"

    def test_single_level_categorical(self):
        space = ck.FeatureSpace(
            (ck.FeatureSpec.categorical("c", ["only"]), ck.FeatureSpec.numeric("x", 0, 1))
        )
        s = ck.build_sample_set(space, space.instance(["only", 0.2]), 0, n=5)
        assert len(s.instances) == 1

    def test_seeded_reproducibility(self, linear_bundle):
        _, space, _ = linear_bundle
        x = space.instance([0.5, 0.5, 0.5, 0.5])
        a = ck.build_sample_set(space, x, 0, n=20, rng=ck.SeededRng(9))
        b = ck.build_sample_set(space, x, 0, n=20, rng=ck.SeededRng(9))
        c = ck.build_sample_set(space, x, 0, n=20, rng=ck.SeededRng(10))
        assert a == b
        assert a != c

    def test_bad_arguments(self, linear_bundle):
        _, space, _ = linear_bundle
        x = space.instance([0.5, 0.5, 0.5, 0.5])
        with pytest.raises(ck.ConfigError):
            ck.build_sample_set(space, x, 4, n=10)
        with pytest.raises(ck.ConfigError):
            ck.build_sample_set(space, x, -1, n=10)
        with pytest.raises(ck.ConfigError):
            ck.build_sample_set(space, x, 0, n=-1)


class TestCeterisParibusGrid:
    def test_unit_interval_grid(self, linear_bundle):
        _, space, _ = linear_bundle
        x = space.instance([0.5, 0.5, 0.5, 0.5])
        grid = ck.ceteris_paribus_grid(space, x, 0, 3)
        assert [g.values[0] for g in grid] == [0.0, 0.5, 1.0]
        grid2 = ck.ceteris_paribus_grid(space, x, 0, 2)
        assert [g.values[0] for g in grid2] == [0.0, 1.0]

    def test_asymmetric_interval(self):
        space = ck.FeatureSpace((ck.FeatureSpec.numeric("x", -1.0, 1.0),))
        grid = ck.ceteris_paribus_grid(space, space.instance([0.0]), 0, 5)
        assert [g.values[0] for g in grid] == [-1.0, -0.5, 0.0, 0.5, 1.0]

    def test_categorical_rejected(self):
        space = ck.FeatureSpace(
            (ck.FeatureSpec.categorical("c", ["a", "b"]), ck.FeatureSpec.numeric("x", 0, 1))
        )
        with pytest.raises(ck.ConfigError):
            ck.ceteris_paribus_grid(space, space.instance(["a", 0.5]), 0, 10)

    def test_too_small_grid_rejected(self, linear_bundle):
        _, space, _ = linear_bundle
        x = space.instance([0.5, 0.5, 0.5, 0.5])
        with pytest.raises(ck.ConfigError):
            ck.ceteris_paribus_grid(space, x, 0, 1)
