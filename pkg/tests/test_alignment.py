"""Aligning one unit vector to another by a unitary close to the identity."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bpbkit.alignment import align_isometry, verify_isometry
from bpbkit.certs import all_passed
from bpbkit.errors import NotOnSphere
from bpbkit.spaces import EuclideanSpace


def random_unit(space: EuclideanSpace, rng: np.random.Generator) -> np.ndarray:
    x = rng.standard_normal(space.dim)
    if space.scalar_field == "complex":
        x = x + 1j * rng.standard_normal(space.dim)
    return space.unit(space.coerce(x))


class TestAlignIsometry:
    def test_maps_u_to_v(self):
        space = EuclideanSpace(3)
        u = space.coerce([1.0, 0.0, 0.0])
        v = space.coerce([0.0, 1.0, 0.0])
        phi = align_isometry(space, u, v)
        np.testing.assert_allclose(phi.matrix @ u, v, atol=1e-12)

    def test_defect_equals_distance(self):
        space = EuclideanSpace(3)
        u = space.coerce([1.0, 0.0, 0.0])
        v = space.coerce([0.0, 1.0, 0.0])
        phi = align_isometry(space, u, v)
        assert phi.defect == pytest.approx(space.norm(u - v), abs=1e-9)
        assert phi.defect == pytest.approx(
            float(np.linalg.norm(phi.matrix - np.eye(3), ord=2)), abs=1e-9
        )

    def test_parallel_vectors_give_identity(self):
        space = EuclideanSpace(3)
        u = space.coerce([0.0, 0.0, 1.0])
        phi = align_isometry(space, u, u)
        assert phi.defect == 0.0
        np.testing.assert_allclose(phi.matrix, np.eye(3), atol=1e-12)

    def test_antipodal_vectors_reach_defect_two(self):
        space = EuclideanSpace(3)
        u = space.coerce([1.0, 0.0, 0.0])
        phi = align_isometry(space, u, -u)
        assert phi.defect == pytest.approx(2.0, abs=1e-12)
        np.testing.assert_allclose(phi.matrix @ u, -u, atol=1e-12)
        assert all_passed(verify_isometry(phi))

    def test_one_dimensional_space(self):
        space = EuclideanSpace(1)
        phi = align_isometry(space, space.coerce([1.0]), space.coerce([-1.0]))
        assert phi.defect == pytest.approx(2.0)
        assert phi.u_perp is None
        assert all_passed(verify_isometry(phi))

    def test_near_parallel_stays_tiny(self):
        space = EuclideanSpace(2)
        u = space.coerce([1.0, 0.0])
        v = space.unit(space.coerce([1.0, 1e-8]))
        phi = align_isometry(space, u, v)
        assert phi.defect <= 2e-8
        assert all_passed(verify_isometry(phi))

    def test_rejects_off_sphere_inputs(self):
        space = EuclideanSpace(3)
        v = space.coerce([0.0, 1.0, 0.0])
        with pytest.raises(NotOnSphere):
            align_isometry(space, space.coerce([2.0, 0.0, 0.0]), v)
        with pytest.raises(NotOnSphere):
            align_isometry(space, v, space.coerce([0.0, 0.0, 0.0]))

    @given(seed=st.integers(min_value=0, max_value=10_000), dim=st.sampled_from([1, 2, 3, 8]))
    @settings(max_examples=60, deadline=None)
    def test_random_real_instances_verify(self, seed, dim):
        space = EuclideanSpace(dim)
        rng = np.random.default_rng(seed)
        u, v = random_unit(space, rng), random_unit(space, rng)
        phi = align_isometry(space, u, v)
        assert all_passed(verify_isometry(phi))
        np.testing.assert_allclose(phi.matrix @ u, v, atol=1e-9)

    @given(seed=st.integers(min_value=0, max_value=10_000), dim=st.sampled_from([1, 2, 5]))
    @settings(max_examples=40, deadline=None)
    def test_random_complex_instances_verify(self, seed, dim):
        space = EuclideanSpace(dim, scalar_field="complex")
        rng = np.random.default_rng(seed)
        u, v = random_unit(space, rng), random_unit(space, rng)
        phi = align_isometry(space, u, v)
        assert all_passed(verify_isometry(phi))
        np.testing.assert_allclose(phi.matrix @ u, v, atol=1e-9)
        # Unitarity over the complex field.
        np.testing.assert_allclose(
            phi.matrix.conj().T @ phi.matrix, np.eye(dim), atol=1e-10
        )


class TestVerifyIsometry:
    def test_certificate_names(self):
        space = EuclideanSpace(2)
        phi = align_isometry(
            space, space.coerce([1.0, 0.0]), space.coerce([0.0, 1.0])
        )
        names = [c.name for c in verify_isometry(phi)]
        assert names == [
            "unitary_entrywise",
            "maps_u_to_v",
            "defect_equals_distance",
            "correction_orthogonal",
        ]

    def test_tampered_matrix_fails(self):
        space = EuclideanSpace(2)
        phi = align_isometry(
            space, space.coerce([1.0, 0.0]), space.coerce([0.0, 1.0])
        )
        phi.matrix[0, 0] += 1e-3
        assert not all_passed(verify_isometry(phi))
