"""Tests for unitary validation, parametrization, Haar sampling, fixtures."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entgen import unitary
from entgen.errors import DomainError, FixtureError


def _max_dev_from_unitary(m):
    return np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))


class TestInterferometer:
    def test_accepts_unitary(self):
        u = unitary.Interferometer(np.eye(3))
        assert u.dim == 3

    def test_rejects_non_unitary(self):
        with pytest.raises(DomainError):
            unitary.Interferometer(np.ones((2, 2)))

    def test_rejects_non_square(self):
        with pytest.raises(DomainError):
            unitary.Interferometer(np.ones((2, 3)))

    def test_matrix_read_only(self):
        u = unitary.Interferometer(np.eye(2))
        with pytest.raises(ValueError):
            u.matrix[0, 0] = 0.0

    def test_json_roundtrip(self):
        u = unitary.haar_sample(4, 11)
        v = unitary.Interferometer.from_json(u.to_json())
        assert np.allclose(u.matrix, v.matrix, atol=1e-15)

    def test_json_shape_mismatch(self):
        obj = unitary.haar_sample(3, 1).to_json()
        obj["dim"] = 4
        with pytest.raises(DomainError):
            unitary.Interferometer.from_json(obj)


class TestParametrization:
    @given(st.integers(1, 5), st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_realize_is_unitary(self, dim, seed):
        rng = np.random.default_rng(seed)
        theta = tuple(rng.standard_normal(dim * dim) * 2.0)
        u = unitary.realize(unitary.UnitaryParams(dim=dim, theta=theta))
        assert _max_dev_from_unitary(u.matrix) <= 1e-12

    @given(st.integers(1, 5), st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_chart_roundtrip(self, dim, seed):
        """realize(params_from_unitary(U)) reproduces U exactly (not just
        up to phase): the generator's matrix exponential is recomputed."""
        u = unitary.haar_sample(dim, seed)
        v = unitary.realize(unitary.params_from_unitary(u))
        assert np.max(np.abs(u.matrix - v.matrix)) <= 1e-10

    def test_wrong_parameter_count(self):
        with pytest.raises(DomainError):
            unitary.UnitaryParams(dim=3, theta=(0.0,) * 8)

    def test_generator_is_hermitian(self):
        rng = np.random.default_rng(5)
        theta = rng.standard_normal(16)
        h = unitary.generator_matrix(4, theta)
        assert np.max(np.abs(h - h.conj().T)) == 0.0

    def test_realize_continuity(self):
        rng = np.random.default_rng(6)
        theta = rng.standard_normal(9)
        base = unitary.realize(unitary.UnitaryParams(dim=3, theta=tuple(theta)))
        delta = rng.standard_normal(9) * 1e-6
        near = unitary.realize(unitary.UnitaryParams(dim=3, theta=tuple(theta + delta)))
        assert np.max(np.abs(near.matrix - base.matrix)) <= 10.0 * np.linalg.norm(delta)


class TestHaarSample:
    def test_deterministic(self):
        a = unitary.haar_sample(5, 123)
        b = unitary.haar_sample(5, 123)
        assert np.array_equal(a.matrix, b.matrix)

    def test_different_seeds_differ(self):
        a = unitary.haar_sample(5, 1)
        b = unitary.haar_sample(5, 2)
        assert not np.allclose(a.matrix, b.matrix)

    def test_first_moment(self):
        """E[|U_jk|^2] = 1/M for Haar-distributed U."""
        dim, samples = 3, 20000
        acc = np.zeros((dim, dim))
        for seed in range(samples):
            acc += np.abs(unitary.haar_sample(dim, seed).matrix) ** 2
        acc /= samples
        assert np.max(np.abs(acc - 1.0 / dim)) < 0.01

    def test_invalid_dim(self):
        with pytest.raises(DomainError):
            unitary.haar_sample(0, 1)


class TestEmbed:
    def test_places_block(self):
        bs1 = unitary.fixture("BS1")
        u = unitary.embed(bs1, 4, (1, 3))
        assert u.matrix[0, 0] == 1.0
        assert u.matrix[2, 2] == 1.0
        assert u.matrix[1, 1] == bs1.matrix[0, 0]
        assert u.matrix[1, 3] == bs1.matrix[0, 1]
        assert u.matrix[3, 1] == bs1.matrix[1, 0]
        assert u.matrix[3, 3] == bs1.matrix[1, 1]

    def test_rejects_bad_modes(self):
        bs1 = unitary.fixture("BS1")
        with pytest.raises(DomainError):
            unitary.embed(bs1, 4, (1, 1))
        with pytest.raises(DomainError):
            unitary.embed(bs1, 4, (0, 4))


class TestFixtures:
    def test_all_unitary(self):
        for name in ("BS1", "BS2", "BS2xBS2_4mode", "BS2xBS1_4mode"):
            u = unitary.fixture(name)
            assert _max_dev_from_unitary(u.matrix) <= 1e-14

    def test_bs1_is_balanced(self):
        u = unitary.fixture("BS1").matrix
        assert np.allclose(np.abs(u) ** 2, 0.5)

    def test_bs2_angle(self):
        # cos(2 theta) = 1/sqrt(3)
        assert math.cos(2 * unitary.BS2_THETA) == pytest.approx(1 / math.sqrt(3), abs=1e-15)
        u = unitary.fixture("BS2").matrix
        assert u[0, 0] == pytest.approx(math.cos(unitary.BS2_THETA), abs=1e-15)
        assert u[0, 1] == pytest.approx(math.sin(unitary.BS2_THETA), abs=1e-15)

    def test_bs2_theta_override(self):
        u = unitary.fixture("BS2", theta=0.0).matrix
        assert np.allclose(u, np.eye(2))

    def test_block_fixture_structure(self):
        u = unitary.fixture("BS2xBS2_4mode").matrix
        c = math.cos(unitary.BS2_THETA)
        s = math.sin(unitary.BS2_THETA)
        expected = np.array(
            [
                [c, 0, 0, s],
                [0, c, s, 0],
                [0, -s, c, 0],
                [-s, 0, 0, c],
            ]
        )
        assert np.allclose(u, expected, atol=1e-15)

    def test_unknown_fixture(self):
        with pytest.raises(FixtureError):
            unitary.fixture("BS3")
