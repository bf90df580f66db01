"""Lattice shells, deck actions, characters and cell reduction."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgpin import (
    KLEIN,
    ManifoldSpec,
    PinCharacter,
    all_characters,
    character_value,
    deck_apply,
    deck_compose,
    orbit_distance,
    reduce_to_cell,
    shell,
    shell_count,
    sign_of,
    singular_distance,
)

ints = st.integers(min_value=-6, max_value=6)
coords = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, width=32)


class TestManifoldSpec:
    def test_mobius_rank_bound(self):
        ManifoldSpec.mobius(3, 2)
        with pytest.raises(ValueError):
            ManifoldSpec.mobius(3, 3)
        with pytest.raises(ValueError):
            ManifoldSpec.mobius(3, 0)

    def test_klein_rank(self):
        assert ManifoldSpec.klein(4).k == 4
        with pytest.raises(ValueError):
            ManifoldSpec(KLEIN, 3, 2)


class TestSign:
    def test_examples(self):
        assert sign_of((0,)) == 1
        assert sign_of((3,)) == -1
        assert sign_of((1, 1)) == 1

    def test_conventions_agree_for_rank_one(self):
        for v in range(-8, 9):
            assert sign_of((v,)) == sign_of((v,), convention="all_even")

    def test_conventions_differ_for_higher_rank(self):
        assert sign_of((1, 1)) == 1
        assert sign_of((1, 1), convention="all_even") == -1

    @given(st.lists(ints, min_size=2, max_size=4), st.data())
    def test_parity_is_multiplicative_but_literal_rule_is_not_needed(self, v, data):
        w = data.draw(st.lists(ints, min_size=len(v), max_size=len(v)))
        vw = [a + b for a, b in zip(v, w)]
        assert sign_of(vw) == sign_of(v) * sign_of(w)


class TestCharacters:
    def test_examples(self):
        chi0 = PinCharacter.trivial(3)
        assert character_value(chi0, (5, -2, 7)) == 1
        chi1 = PinCharacter(2, frozenset({1}))
        assert character_value(chi1, (1, 0)) == -1
        chi12 = PinCharacter(2, frozenset({1, 2}))
        assert character_value(chi12, (1, 1)) == 1

    def test_count(self):
        assert len(list(all_characters(3))) == 8

    def test_bad_index(self):
        with pytest.raises(ValueError):
            PinCharacter(2, frozenset({3}))

    @given(
        st.sets(st.integers(min_value=1, max_value=3), max_size=3),
        st.lists(ints, min_size=3, max_size=3),
        st.lists(ints, min_size=3, max_size=3),
    )
    def test_multiplicative(self, S, v, w):
        chi = PinCharacter(3, frozenset(S))
        vw = [a + b for a, b in zip(v, w)]
        assert chi.value(vw) == chi.value(v) * chi.value(w)

    def test_signs_vectorized(self):
        chi = PinCharacter(2, frozenset({2}))
        V = np.array([[0, 0], [1, 0], [0, 1], [2, -3]])
        assert np.array_equal(chi.signs(V), [1.0, 1.0, -1.0, -1.0])


class TestShells:
    def test_rank_one(self):
        sh = shell(1, 2)
        assert sh.points.tolist() == [[-2], [2]]
        assert sh.count == 2

    @pytest.mark.parametrize("k,m,expected", [(2, 1, 8), (3, 1, 26), (2, 3, 24), (1, 0, 1)])
    def test_counts(self, k, m, expected):
        assert shell(k, m).count == expected == shell_count(k, m)

    def test_lexicographic_order(self):
        pts = shell(2, 2).points.tolist()
        assert pts == sorted(pts)

    def test_partition_of_ball(self):
        k, M = 2, 3
        union = set()
        total = 0
        for m in range(M + 1):
            pts = {tuple(p) for p in shell(k, m).points.tolist()}
            assert not (union & pts)
            union |= pts
            total += len(pts)
        cube = set(itertools.product(range(-M, M + 1), repeat=k))
        assert union == cube
        assert total == (2 * M + 1) ** k

    def test_readonly(self):
        with pytest.raises(ValueError):
            shell(2, 1).points[0, 0] = 5


class TestDeckAction:
    def test_classical_strip(self):
        spec = ManifoldSpec.mobius(3, 1)
        out = deck_apply(spec, [1], [0.2, 0.5, 0.7])
        assert np.allclose(out, [1.2, 0.5, -0.7])

    def test_klein_example(self):
        spec = ManifoldSpec.klein(2)
        out = deck_apply(spec, [0, 1], [0.3, 0.4])
        assert np.allclose(out, [0.3, 0.6])

    def test_identity(self):
        for spec in (ManifoldSpec.mobius(4, 2), ManifoldSpec.klein(3)):
            x = np.array([0.3, -0.8, 1.7, 0.4][: spec.n])
            assert np.allclose(deck_apply(spec, [0] * spec.k, x), x)

    def test_rank_mismatch(self):
        with pytest.raises(ValueError):
            deck_apply(ManifoldSpec.mobius(3, 1), [1, 2], [0.1, 0.2, 0.3])

    @given(
        st.lists(ints, min_size=2, max_size=2),
        st.lists(ints, min_size=2, max_size=2),
        st.lists(coords, min_size=4, max_size=4),
    )
    @settings(max_examples=60)
    def test_mobius_composition_law(self, v, w, x):
        spec = ManifoldSpec.mobius(4, 2)
        lhs = deck_apply(spec, v, deck_apply(spec, w, x))
        rhs = deck_apply(spec, deck_compose(spec, v, w), x)
        assert np.allclose(lhs, rhs, atol=1e-15)

    @given(
        st.lists(ints, min_size=2, max_size=2),
        st.lists(ints, min_size=2, max_size=2),
        st.lists(coords, min_size=2, max_size=2),
    )
    @settings(max_examples=60)
    def test_klein_group_closure(self, v, w, x):
        spec = ManifoldSpec.klein(2)
        lhs = deck_apply(spec, v, deck_apply(spec, w, x))
        rhs = deck_apply(spec, deck_compose(spec, v, w), x)
        assert np.allclose(lhs, rhs, atol=1e-12)

    def test_klein_label_composition_is_not_addition(self):
        spec = ManifoldSpec.klein(2)
        v, w = np.array([0, 1]), np.array([0, 1])
        assert deck_compose(spec, v, w).tolist() == [0, 0]

    def test_klein_inverse_exists(self):
        spec = ManifoldSpec.klein(2)
        rng = np.random.default_rng(3)
        for _ in range(20):
            v = rng.integers(-4, 5, size=2)
            b = int(v[1])
            inv = np.array([-v[0], -b if b % 2 == 0 else b])
            assert deck_compose(spec, v, inv).tolist() == [0, 0]
            x = rng.uniform(-2, 2, size=2)
            assert np.allclose(deck_apply(spec, inv, deck_apply(spec, v, x)), x)


def _orbit_brute(spec, y, window=4):
    pts = []
    for v in itertools.product(range(-window, window + 1), repeat=spec.k):
        pts.append(deck_apply(spec, list(v), y))
    return np.array(pts)


class TestReduceToCell:
    def test_klein_example(self):
        spec = ManifoldSpec.klein(2)
        out = reduce_to_cell(spec, [2.3, 3.4])
        assert 0.0 <= out[0] < 1.0 and 0.0 <= out[1] < 2.0
        orbit = _orbit_brute(spec, [2.3, 3.4], window=6)
        assert np.min(np.linalg.norm(orbit - out, axis=1)) < 1e-12

    def test_mobius_example(self):
        spec = ManifoldSpec.mobius(3, 1)
        out = reduce_to_cell(spec, [1.2, 0.5, 0.7])
        assert np.allclose(out, [0.2, 0.5, -0.7])

    @pytest.mark.parametrize("seed", range(4))
    def test_idempotent_and_on_orbit(self, seed):
        rng = np.random.default_rng(seed)
        for spec in (ManifoldSpec.mobius(3, 2), ManifoldSpec.klein(2), ManifoldSpec.klein(3)):
            x = rng.uniform(-3.0, 3.0, size=spec.n)
            red = reduce_to_cell(spec, x)
            assert np.allclose(reduce_to_cell(spec, red), red, atol=1e-12)
            orbit = _orbit_brute(spec, x)
            assert np.min(np.linalg.norm(orbit - red, axis=1)) < 1e-10


class TestDistances:
    @pytest.mark.parametrize("seed", range(6))
    def test_orbit_distance_matches_enumeration(self, seed):
        rng = np.random.default_rng(100 + seed)
        for spec in (ManifoldSpec.mobius(3, 1), ManifoldSpec.mobius(4, 2), ManifoldSpec.klein(2)):
            x = rng.uniform(-1.5, 2.5, size=spec.n)
            y = rng.uniform(-1.5, 2.5, size=spec.n)
            brute = np.min(np.linalg.norm(_orbit_brute(spec, y, window=5) - x, axis=1))
            assert orbit_distance(spec, x, y) == pytest.approx(brute, abs=1e-12)

    def test_mobius_parity_coupling(self):
        # x = gamma_{e1}(y) + offset in x_n only: the nearest pure translation
        # is odd, so the naive decoupled minimum would spuriously vanish
        spec = ManifoldSpec.mobius(3, 1)
        y = np.array([0.3, 0.4, 0.6])
        x = np.array([1.3, 0.4, 0.6])  # = y + e_1 but WITHOUT the sign flip
        brute = np.min(np.linalg.norm(_orbit_brute(spec, y, window=5) - x, axis=1))
        assert brute > 0.5
        assert orbit_distance(spec, x, y) == pytest.approx(brute, abs=1e-12)

    def test_singular_distance_is_orbit_distance_to_origin(self):
        rng = np.random.default_rng(5)
        for spec in (ManifoldSpec.mobius(3, 1), ManifoldSpec.klein(2)):
            for _ in range(10):
                x = rng.uniform(-2, 2, size=spec.n)
                assert singular_distance(spec, x) == pytest.approx(
                    orbit_distance(spec, x, np.zeros(spec.n)), abs=1e-12
                )
