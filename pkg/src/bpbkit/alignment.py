"""Aligning isometries of a Euclidean space.

Given unit vectors u, v of a real or complex Euclidean space, build a
surjective linear isometry with ``phi(u) = v`` whose distance to the identity
is exactly ``|u - v|``.  The map rotates the plane spanned by u and v and
fixes its orthogonal complement pointwise, which is what makes the distance
sharp: no mass outside the plane ever moves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .certs import Certificate, check
from .errors import DimensionError
from .spaces import EuclideanSpace

_PARALLEL_TOL = 1e-13


@dataclass(frozen=True)
class AligningIsometry:
    """A unitary (orthogonal) matrix aligning u to v.

    ``defect`` is the operator norm of ``matrix - I``; the construction
    guarantees it equals ``|u - v|``.  ``u_perp``/``v_perp`` are the
    companion orthonormal directions used by the construction (None in
    dimension one).
    """

    matrix: np.ndarray
    u: np.ndarray
    v: np.ndarray
    defect: float
    u_perp: np.ndarray | None
    v_perp: np.ndarray | None


def _orthonormalize_against(space: EuclideanSpace, w: np.ndarray,
                            v: np.ndarray) -> np.ndarray:
    """Unit vector in the direction of w minus its component along unit v,
    re-projected twice for numerical orthogonality."""
    for _ in range(2):
        w = w - space.inner(w, v) * v
    n = float(np.linalg.norm(w))
    if n == 0.0:
        raise DimensionError("cannot orthonormalize the zero direction")
    return w / n


def _first_orthogonal_direction(space: EuclideanSpace, v: np.ndarray) -> np.ndarray:
    """The first canonical basis vector with a usable component orthogonal
    to v, Gram-Schmidt normalized (deterministic choice for parallel pairs)."""
    for j in range(space.dim):
        e = np.zeros(space.dim, dtype=space.dtype)
        e[j] = 1.0
        w = e - space.inner(e, v) * v
        if float(np.linalg.norm(w)) > 1e-6:
            return _orthonormalize_against(space, w, v)
    raise DimensionError("no direction orthogonal to v found")  # pragma: no cover


def align_isometry(space: EuclideanSpace, u, v) -> AligningIsometry:
    """Isometry with ``phi(u) = v`` and ``|phi - I| = |u - v|``.

    In dimension one the map is multiplication by ``v/u``.  Otherwise a
    companion direction ``v_perp`` orthonormal to v is chosen inside
    span{u, v} (or, for parallel u, v, as the first Gram-Schmidt candidate),
    u is decomposed as ``u1 v + u2 v_perp``, the twin
    ``u_perp = -conj(u2) v + conj(u1) v_perp`` is formed, and the map sends
    u to v and u_perp to v_perp while fixing the orthogonal complement.
    """
    uv = space.coerce(u)
    vv = space.coerce(v)
    space.sphere_check(uv)
    space.sphere_check(vv)
    uv = uv / float(np.linalg.norm(uv))
    vv = vv / float(np.linalg.norm(vv))

    if space.dim == 1:
        ratio = vv[0] / uv[0]
        matrix = np.array([[ratio]], dtype=space.dtype)
        defect = abs(ratio - 1.0)
        return AligningIsometry(matrix, uv, vv, float(defect), None, None)

    w = uv - space.inner(uv, vv) * vv
    if float(np.linalg.norm(w)) < _PARALLEL_TOL:
        v_perp = _first_orthogonal_direction(space, vv)
    else:
        v_perp = _orthonormalize_against(space, w, vv)

    u1 = space.inner(uv, vv)
    u2 = space.inner(uv, v_perp)
    u_perp = -np.conj(u2) * vv + np.conj(u1) * v_perp

    b_old = np.column_stack([uv, u_perp])
    b_new = np.column_stack([vv, v_perp])
    eye = np.eye(space.dim, dtype=space.dtype)
    matrix = b_new @ b_old.conj().T + (eye - b_old @ b_old.conj().T)

    # The difference to the identity lives on span{u, u_perp}; in the v-basis
    # its matrix is the 2x2 block below, whose largest singular value is the
    # defect.
    block = np.array([[1.0 - u1, np.conj(u2)],
                      [-u2, 1.0 - np.conj(u1)]], dtype=np.complex128)
    sv = np.linalg.svd(block, compute_uv=False)
    defect = float(sv[0])
    return AligningIsometry(matrix, uv, vv, defect, u_perp, v_perp)


def verify_isometry(phi: AligningIsometry) -> list[Certificate]:
    """Recompute the aligning-isometry invariants from scratch.

    Violations are reported in the returned certificates, never thrown.
    """
    mat = np.asarray(phi.matrix)
    dim = mat.shape[0]
    eye = np.eye(dim, dtype=mat.dtype)
    unitary_residual = float(np.max(np.abs(mat.conj().T @ mat - eye)))
    maps_residual = float(np.max(np.abs(mat @ phi.u - phi.v)))
    direct = float(np.linalg.norm(phi.u - phi.v))
    certs = [
        check("unitary_entrywise", unitary_residual, "<=", 0.0, tol=1e-10),
        check("maps_u_to_v", maps_residual, "<=", 0.0, tol=1e-10),
        check("defect_equals_distance", phi.defect, "==", direct, tol=1e-8),
    ]
    if phi.u_perp is not None:
        ortho = abs(complex(np.dot(phi.v - phi.u,
                                   np.conj(phi.v_perp - phi.u_perp))))
        certs.append(check("correction_orthogonal", float(ortho), "<=", 0.0,
                           tol=1e-10))
    return certs
