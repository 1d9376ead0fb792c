import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nrsector.core import (
    INF,
    CVec,
    FiniteMeasureSpace,
    Sector,
    dual_exponent,
    duality_map,
    in_sector,
    normalize,
    p_norm,
    pairing,
    sector_angle,
    sector_angle_arctan,
)
from nrsector.errors import DomainError, SizeError

P_GRID = (1.1, 1.5, 2.0, 3.0, 4.0, 10.0)


def vec(entries, weights):
    return CVec(entries, FiniteMeasureSpace(weights))


class TestMeasureSpace:
    def test_rejects_nonpositive_weights(self):
        with pytest.raises(DomainError):
            FiniteMeasureSpace([1.0, 0.0])
        with pytest.raises(DomainError):
            FiniteMeasureSpace([1.0, math.inf])
        with pytest.raises(DomainError):
            FiniteMeasureSpace([])

    def test_weights_are_immutable(self):
        space = FiniteMeasureSpace([1.0, 2.0])
        with pytest.raises(ValueError):
            space.weights[0] = 5.0

    def test_vector_length_must_match(self):
        with pytest.raises(SizeError):
            CVec([1, 2, 3], FiniteMeasureSpace([1, 1]))


class TestPairing:
    def test_single_atom_mass(self):
        assert pairing(vec([1, 0], [2, 3]), vec([1, 0], [2, 3])) == 2

    def test_cancellation(self):
        assert pairing(vec([1, 1j], [1, 1]), vec([1j, 1], [1, 1])) == 0

    @pytest.mark.parametrize("j", [0, 1, 2])
    def test_indicator_gives_atom_mass(self, j):
        space = FiniteMeasureSpace([0.5, 2.0, 3.5])
        e = space.indicator([j])
        assert pairing(e, e) == space.weights[j]

    def test_size_mismatch(self):
        with pytest.raises(SizeError):
            pairing(vec([1, 1], [1, 1]), vec([1, 1], [1, 2]))

    def test_conjugate_symmetry(self, rng):
        w = rng.uniform(0.1, 3, 6)
        f = vec(rng.standard_normal(6) + 1j * rng.standard_normal(6), w)
        g = vec(rng.standard_normal(6) + 1j * rng.standard_normal(6), w)
        assert pairing(f, g) == pytest.approx(np.conj(pairing(g, f)), abs=1e-15)


class TestNorms:
    def test_examples(self):
        assert p_norm(vec([1, 1], [1, 1]), 2) == pytest.approx(math.sqrt(2), rel=1e-15)
        assert p_norm(vec([1, 1], [2, 2]), 2) == pytest.approx(2.0, rel=1e-15)
        assert p_norm(vec([3, -4j], [1, 1]), INF) == 4.0
        assert p_norm(vec([3, -4j], [1, 1]), "inf") == 4.0

    def test_p_below_one(self):
        with pytest.raises(DomainError):
            p_norm(vec([1, 1], [1, 1]), 0.5)

    def test_no_overflow_for_large_p(self):
        f = vec([1e200, 1e200], [1, 1])
        assert p_norm(f, 10) == pytest.approx(1e200 * 2 ** 0.1, rel=1e-14)

    def test_dual_exponent(self):
        assert dual_exponent(4) == pytest.approx(4 / 3)
        assert dual_exponent(1) == INF
        assert dual_exponent(INF) == 1.0


class TestDualityMap:
    def test_zero_maps_to_zero(self):
        for p in P_GRID:
            assert duality_map(vec([0, 1], [1, 1]), p).entries[0] == 0

    def test_p2_is_identity(self, rng):
        z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        np.testing.assert_allclose(duality_map(vec(z, [1] * 4), 2).entries, z, rtol=1e-15)

    def test_p3_examples(self):
        out = duality_map(vec([2, -2j], [1, 1]), 3).entries
        assert out[0] == 4
        assert out[1] == -4j

    def test_domain(self):
        with pytest.raises(DomainError):
            duality_map(vec([1], [1]), 1)

    @pytest.mark.parametrize("p", P_GRID)
    def test_normalisation(self, p, rng):
        w = rng.uniform(0.2, 4, 7)
        f = normalize(vec(rng.standard_normal(7) + 1j * rng.standard_normal(7), w), p)
        Ff = duality_map(f, p)
        assert p_norm(Ff, dual_exponent(p)) == pytest.approx(1.0, abs=1e-10)
        assert pairing(f, Ff) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("p", P_GRID)
    def test_homogeneity(self, p, rng):
        f = vec(rng.standard_normal(5) + 1j * rng.standard_normal(5), [1] * 5)
        for t in (1e-3, 0.7, 5.0):
            lhs = duality_map(t * f, p).entries
            rhs = t ** (p - 1) * duality_map(f, p).entries
            np.testing.assert_allclose(lhs, rhs, rtol=1e-10)


complex_entries = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=200, deadline=None)
@given(
    f=st.lists(complex_entries, min_size=3, max_size=3),
    g=st.lists(complex_entries, min_size=3, max_size=3),
    w=st.lists(st.floats(0.01, 100), min_size=3, max_size=3),
    p=st.sampled_from(P_GRID),
)
def test_holder(f, g, w, p):
    F, G = vec(f, w), vec(g, w)
    bound = p_norm(F, p) * p_norm(G, dual_exponent(p))
    assert abs(pairing(F, G)) <= bound * (1 + 1e-12) + 1e-300


class TestSectorAngle:
    def test_examples(self):
        assert sector_angle(2) == 0.0
        assert sector_angle(4) == pytest.approx(math.pi / 6, abs=1e-15)
        assert sector_angle(4 / 3) == pytest.approx(math.pi / 6, abs=1e-15)

    @pytest.mark.parametrize("p", [1.0, 0.5, INF])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            sector_angle(p)

    def test_arctan_form(self):
        for p in np.linspace(1.001, 100, 500):
            assert abs(sector_angle(p) - sector_angle_arctan(p)) <= 1e-12

    def test_duality(self):
        for p in np.linspace(1.01, 50, 200):
            assert sector_angle(p) == pytest.approx(sector_angle(p / (p - 1)), abs=1e-12)

    def test_monotone_and_limits(self):
        up = [sector_angle(p) for p in np.linspace(2, 1e4, 400)]
        down = [sector_angle(p) for p in np.linspace(1 + 1e-9, 2, 400)]
        assert np.all(np.diff(up) > 0)
        assert np.all(np.diff(down) < 0)
        assert up[0] == 0.0 and down[-1] == 0.0
        assert sector_angle(1 + 1e-12) == pytest.approx(math.pi / 2, abs=1e-5)
        assert sector_angle(1e12) == pytest.approx(math.pi / 2, abs=1e-5)

    def test_below_interpolation_angle(self):
        for p in np.linspace(1.001, 100, 1000):
            assert sector_angle(p) <= math.pi / 2 * abs(1 - 2 / p) + 1e-15


class TestInSector:
    def test_examples(self):
        assert in_sector(1, Sector(0.0), tol=0)
        for a in (0.0, 0.3, math.pi / 2):
            assert in_sector(0, Sector(a), tol=0)
        assert not in_sector(np.exp(1j * math.pi / 4), Sector(math.pi / 6), tol=1e-12)

    def test_right_half_plane(self):
        half = Sector(math.pi / 2)
        assert in_sector(1j, half, 0)
        assert not in_sector(-1e-3 + 1j, half, 1e-9)

    def test_vectorised(self):
        z = np.array([1, 1j, -1, 0])
        np.testing.assert_array_equal(in_sector(z, Sector(0.1), 1e-9), [True, False, False, True])

    def test_bad_angle(self):
        with pytest.raises(DomainError):
            Sector(2.0)
        with pytest.raises(DomainError):
            in_sector(1, Sector(0.1), tol=-1)
