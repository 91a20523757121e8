"""Approximate hyperplane witnesses and their direct-sum assembly.

A witness for a convex series of unit vectors is a heavy index set A, a
unit functional, and unit points z_k in that functional's face with
``z_k`` close to the series points.  This module provides:

* the witness type and its verifier;
* face-approximation oracles for uniformly convex spaces (the modulus of
  convexity drives the distance guarantee) and for polyhedral planes
  (faces are segments; a positive gap separates off-face vertices);
* a finite-dimensional witness constructor (norming functional, mass
  filter, per-kind exact face projections, brute-force fallback);
* the two-summand pipeline: profile-level witness in the plane, lifted
  points, a heavy-set filter, and a three-way case split on the dual
  components of the norming functional, every promised inequality being
  re-checked numerically;
* the restriction of a sum-level witness to one summand at doubled eps.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from .absolute import AbsoluteNorm2, boundary_completion, lemma_fact_delta
from .bpb import HYPOTHESIS_SLACK, ConvexSeries, filter_large_real_part
from .certs import Certificate, check, ensure
from .errors import (HypothesisError, InternalInvariantError,
                     NotUniformlyConvex, OracleViolation, RangeError,
                     WitnessSearchFailed)
from .lattices import Absolute2Lattice
from .moduli import convexity_modulus
from .spaces import DirectSumSpace, LpSpace, NormedSpace, PlaneSpace
from .util import TOL_SPHERE

#: Additive hypothesis slack at the top of the direct-sum pipeline; the
#: honest entry threshold collapses below float resolution, so admission is
#: decided up to this slack while every downstream inequality is still
#: checked at its stated bound.
DIRECT_SUM_SLACK = 1e-8

#: Floors for the direct-sum parameter block (set to 0 to disable).
AHSP_S_FLOOR = 1e-4
AHSP_R_FLOOR = 1e-6


@dataclass(frozen=True)
class AhspWitness:
    """Heavy set, face points, and the functional that ties them together.

    ``indices[j]`` is the series position witnessed by ``points[j]``; the
    points are unit vectors on which ``functional`` takes the value one,
    and ``functional`` has dual norm one, all within ``TOL_SPHERE``.
    """

    space: NormedSpace
    indices: tuple[int, ...]
    points: tuple[np.ndarray, ...]
    functional: np.ndarray
    epsilon: float
    certificates: tuple[Certificate, ...] = field(default_factory=tuple)

    def as_dict(self) -> dict[int, np.ndarray]:
        return dict(zip(self.indices, self.points))

    def to_json(self) -> dict:
        from .spaces import _scalar_to_json
        return {
            "space": self.space.to_json(),
            "indices": list(self.indices),
            "points": [[_scalar_to_json(v) for v in p]
                       for p in self.points],
            "functional": [_scalar_to_json(v) for v in self.functional],
            "epsilon": self.epsilon,
        }


def witness_from_json(data: dict) -> AhspWitness:
    from .spaces import _scalar_from_json, space_from_json
    space = space_from_json(data["space"])
    return AhspWitness(
        space=space,
        indices=tuple(int(i) for i in data["indices"]),
        points=tuple(
            space.coerce(np.array([_scalar_from_json(v) for v in p]))
            for p in data["points"]),
        functional=space.coerce(np.array([_scalar_from_json(v)
                                          for v in data["functional"]])),
        epsilon=float(data["epsilon"]),
    )


def verify_ahsp_witness(series: ConvexSeries,
                        witness: AhspWitness) -> list[Certificate]:
    """Recompute the three witness conditions with fresh evaluations.

    Never raises: returns certificates for the heavy mass (> 1 - eps), the
    point distances (< eps), unit points, face values, and the unit
    functional.
    """
    space, eps = witness.space, witness.epsilon
    w = series.weights
    mass = float(sum(w[k] for k in witness.indices))
    unit_dev = 0.0
    face_dev = 0.0
    dist_max = 0.0
    for k, z in zip(witness.indices, witness.points):
        zv = space.coerce(z)
        unit_dev = max(unit_dev, abs(space.norm(zv) - 1.0))
        face_dev = max(face_dev,
                       abs(np.real(space.pairing(witness.functional, zv)) - 1.0))
        dist_max = max(dist_max, space.norm(zv - space.coerce(series.payload[k])))
    return [
        check("witness-mass", mass, ">", 1.0 - eps),
        check("witness-distance", dist_max, "<", eps),
        check("witness-point-unit", unit_dev, "<=", 0.0, tol=TOL_SPHERE),
        check("witness-face-value", face_dev, "<=", 0.0, tol=TOL_SPHERE),
        check("witness-functional-unit",
              abs(space.dual_norm(witness.functional) - 1.0), "<=", 0.0,
              tol=TOL_SPHERE),
    ]


# -- face machinery ---------------------------------------------------------


def _uc_delta(space: NormedSpace):
    """Closed-form convexity modulus for the uniformly convex kinds."""
    if space.kind == "euclidean":
        return lambda e: 1.0 - math.sqrt(max(0.0, 1.0 - e * e / 4.0))
    if space.kind == "lp" and 1.0 < space.p < math.inf:
        return lambda e: convexity_modulus(space, e)
    if space.kind == "absolute2" and space.generator.is_smooth:
        proxy = LpSpace(2, space.generator.p)
        return lambda e: convexity_modulus(proxy, e)
    raise NotUniformlyConvex(
        f"space kind {space.kind!r} has no uniformly convex modulus here")


class UniformlyConvexAhpOracle:
    """Face-approximation data for a uniformly convex space.

    ``delta`` is the modulus of convexity; the face representative map is
    the identity; the face of a unit functional is the single point where
    it attains, so the face projection ignores the query point.
    """

    def __init__(self, space: NormedSpace):
        self.space = space
        self._delta = _uc_delta(space)

    def delta(self, epsilon: float) -> float:
        if not 0.0 < epsilon <= 2.0:
            raise RangeError(f"epsilon must lie in (0, 2], got {epsilon}")
        return self._delta(epsilon)

    def upsilon(self, x_star: np.ndarray) -> np.ndarray:
        """Identity on the norming set (unit functionals)."""
        return self.space.coerce(x_star)

    def face_point(self, y_star: np.ndarray, x=None) -> np.ndarray:
        """The unique unit vector where ``y_star`` attains its norm."""
        return self.space.attaining_vector(y_star)

    def sample_norming(self, rng: np.random.Generator, count: int) -> list[np.ndarray]:
        """Random unit functionals (the norming set is the full dual sphere)."""
        out = []
        for _ in range(count):
            raw = rng.standard_normal(self.space.dim)
            if self.space.scalar_field == "complex":
                raw = raw + 1j * rng.standard_normal(self.space.dim)
            out.append(self.space.coerce(raw) / self.space.dual_norm(raw))
        return out


def ahp_oracle_uniformly_convex(space: NormedSpace) -> UniformlyConvexAhpOracle:
    """The face oracle whose ``delta`` is the modulus of convexity.

    Raises :class:`NotUniformlyConvex` for kinds with flat faces.
    """
    return UniformlyConvexAhpOracle(space)


def _project_segment(gen: AbsoluteNorm2, p: np.ndarray, va: np.ndarray,
                     vb: np.ndarray) -> np.ndarray:
    """Nearest point (in the generator norm) to ``p`` on [va, vb]."""
    d = vb - va

    def cost(lam: float) -> float:
        return gen.value(p - (va + lam * d))

    lo, hi = 0.0, 1.0
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv_phi * (hi - lo)
    dd = lo + inv_phi * (hi - lo)
    fc, fd = cost(c), cost(dd)
    for _ in range(100):
        if fc < fd:
            hi, dd, fd = dd, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = cost(c)
        else:
            lo, c, fc = c, dd, fd
            dd = lo + inv_phi * (hi - lo)
            fd = cost(dd)
    lam = 0.5 * (lo + hi)
    return va + lam * d


def _polyhedral_face_point(plane: PlaneSpace, functional, x) -> np.ndarray:
    """Nearest point to ``x`` on the face of ``functional`` (polyhedral
    generator): the face is the convex hull of the sphere vertices the
    functional supports, pushed into the functional's sign quadrant."""
    gen = plane.generator
    fv = plane.coerce(functional)
    xv = plane.coerce(x)
    signs = np.where(fv < 0.0, -1.0, 1.0)
    verts = [signs * np.array(v) for v in gen.face_vertices(np.abs(fv))]
    best = None
    best_d = math.inf
    for i, v in enumerate(verts):
        cands = [v]
        if i + 1 < len(verts):
            cands.append(_project_segment(gen, xv, v, verts[i + 1]))
        for z in cands:
            d = gen.value(xv - z)
            if d < best_d:
                best, best_d = z, d
    return best


def _exact_face_point(space: NormedSpace, x_star, x):
    """Per-kind exact projection onto the face of ``x_star``; None when the
    kind has no closed-form face."""
    if space.kind == "euclidean":
        return space.attaining_vector(x_star)
    if space.kind == "lp" and 1.0 < space.p < math.inf:
        return space.attaining_vector(x_star)
    if space.kind == "absolute2":
        if space.generator.is_smooth:
            return space.attaining_vector(x_star)
        return _polyhedral_face_point(space, x_star, x)
    if space.kind == "lp" and space.p == 1.0:
        fv = space.coerce(x_star)
        xv = space.coerce(x)
        support = np.abs(fv) >= 1.0 - 1e-12
        sgn = np.where(fv < 0.0, -1.0, 1.0)
        w = np.where(support, np.maximum(xv * sgn, 0.0), 0.0)
        total = float(w.sum())
        if total == 0.0:
            i0 = int(np.nonzero(support)[0][0])
            z = np.zeros(space.dim)
            z[i0] = sgn[i0]
            return z
        return sgn * w / total
    if space.kind == "lp" and space.p == math.inf:
        fv = space.coerce(x_star)
        xv = space.coerce(x)
        sgn = np.where(fv < 0.0, -1.0, 1.0)
        return np.where(np.abs(fv) > 1e-15, sgn, np.clip(xv, -1.0, 1.0))
    return None


def _optimized_face_point(space: NormedSpace, x_star, x) -> np.ndarray:
    """Constrained-minimization face projection for kinds without a closed
    form (real spaces): minimize the distance subject to value one and
    staying inside the ball."""
    from scipy.optimize import minimize
    fv = space.coerce(x_star)
    xv = space.coerce(x)
    g = space.attaining_vector(fv)
    z0 = xv + (1.0 - float(np.dot(fv, xv))) * g
    res = minimize(
        lambda z: float(space.norm(z - xv)), z0, method="SLSQP",
        constraints=[
            {"type": "eq", "fun": lambda z: float(np.dot(fv, z)) - 1.0},
            {"type": "ineq", "fun": lambda z: 1.0 - float(space.norm(z))},
        ],
        options={"maxiter": 200, "ftol": 1e-14},
    )
    return space.coerce(res.x)


def _sphere_samples(space: NormedSpace, resolution: int) -> list[np.ndarray]:
    if space.dim == 1:
        dirs = [np.array([1.0]), np.array([-1.0])]
    elif space.dim == 2:
        angles = np.linspace(0.0, 2.0 * math.pi, 4 * resolution, endpoint=False)
        dirs = [np.array([math.cos(a), math.sin(a)]) for a in angles]
    else:
        n = 8 * resolution
        golden = math.pi * (3.0 - math.sqrt(5.0))
        dirs = []
        for i in range(n):
            y = 1.0 - 2.0 * (i + 0.5) / n
            rad = math.sqrt(max(0.0, 1.0 - y * y))
            th = golden * i
            dirs.append(np.array([rad * math.cos(th), y, rad * math.sin(th)]))
    return [d / space.norm(d) for d in dirs]


def _brute_force_face_point(space: NormedSpace, x_star, x,
                            resolution: int = 2000) -> np.ndarray:
    """Discretized-sphere face search (dimension <= 3): keep the sampled
    unit vectors where the functional attains one, pick the nearest."""
    fv = space.coerce(x_star)
    xv = space.coerce(x)
    samples = _sphere_samples(space, resolution)
    vals = np.array([float(np.dot(fv, z)) for z in samples])
    eligible = np.nonzero(vals >= 1.0 - 1e-12)[0]
    if eligible.size == 0:
        eligible = np.nonzero(vals >= vals.max() - 1e-12)[0]
    best = min(eligible, key=lambda i: space.norm(samples[i] - xv))
    return samples[best]


def finite_dim_witness(space: NormedSpace, series: ConvexSeries,
                       epsilon: float, eta: float,
                       slack: float = 0.0) -> AhspWitness:
    """Witness for a series of ball vectors in a finite-dimensional space.

    The functional norms the weighted sum; the heavy set keeps the indices
    whose value exceeds ``1 - eta/epsilon`` (so its mass exceeds
    ``1 - epsilon``); each kept point is projected onto the functional's
    face.  The result is verified before returning; in dimension <= 3 a
    discretized-sphere search retries failures.
    """
    if not 0.0 < epsilon < 1.0:
        raise RangeError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not 0.0 < eta < epsilon:
        raise RangeError(
            f"eta must lie in (0, epsilon) for the mass policy, got {eta}")
    pts = [space.coerce(p) for p in series.payload]
    norms = [space.norm(p) for p in pts]
    if max(norms) > 1.0 + TOL_SPHERE:
        raise RangeError(
            f"series points must lie in the unit ball (max norm {max(norms)})")
    total = sum(w * p for w, p in zip(series.weights, pts))
    total_norm = space.norm(total)
    if not total_norm > 1.0 - eta - slack - HYPOTHESIS_SLACK:
        raise HypothesisError(
            f"|sum a_k x_k| = {total_norm} is not above 1 - eta = {1.0 - eta}")
    x_star = space.norming_functional(total)
    values = np.array([float(np.real(space.pairing(x_star, p))) for p in pts])
    r = 1.0 - eta / epsilon
    picked = filter_large_real_part(
        ConvexSeries(series.weights, values, strict=series.strict),
        eta + slack + HYPOTHESIS_SLACK, r)
    A = picked.indices
    if not A:
        raise WitnessSearchFailed(
            f"no series point exceeded the face threshold {r}",
            residuals={"max-value": float(values.max())})

    def build(projector) -> AhspWitness:
        zs = []
        for k in A:
            z = projector(space, x_star, pts[k])
            if z is None:
                z = _optimized_face_point(space, x_star, pts[k])
            zs.append(space.coerce(z))
        return AhspWitness(space, A, tuple(zs), x_star, epsilon)

    witness = build(_exact_face_point)
    report = verify_ahsp_witness(series, witness)
    if all(c.passed for c in report):
        return AhspWitness(space, A, witness.points, x_star, epsilon,
                           tuple(report))
    if space.dim <= 3:
        witness = build(lambda sp, f, x: _brute_force_face_point(sp, f, x))
        report = verify_ahsp_witness(series, witness)
        if all(c.passed for c in report):
            return AhspWitness(space, A, witness.points, x_star, epsilon,
                               tuple(report))
    raise WitnessSearchFailed(
        f"no witness met epsilon = {epsilon}",
        residuals={c.name: c.margin for c in report if not c.passed})


# -- series-level oracles ---------------------------------------------------


class AhspOracle(ABC):
    """Witness factory for one space, with two entry points.

    ``witness`` consumes a convex series and a target eps under the
    hypothesis ``|sum a_k x_k| > 1 - eta(eps)``.  ``witness_ball`` consumes
    ball points together with a unit functional already known to nearly
    support every point (``Re w*(p_k) > 1 - eta_ball(eps)``) and returns
    kept positions, face points, and the output functional; implementations
    self-check their distance contract and raise :class:`OracleViolation`
    rather than return an invalid answer.
    """

    space: NormedSpace

    @abstractmethod
    def eta(self, epsilon: float) -> float:
        ...

    @abstractmethod
    def eta_ball(self, epsilon: float) -> float:
        ...

    @abstractmethod
    def witness(self, series: ConvexSeries, epsilon: float,
                slack: float = 0.0) -> AhspWitness:
        ...

    @abstractmethod
    def witness_ball(self, weights, points, functional, epsilon: float
                     ) -> tuple[tuple[int, ...], list[np.ndarray], np.ndarray]:
        ...


class UniformlyConvexAhspOracle(AhspOracle):
    """Witnesses in a uniformly convex space: every face is one point.

    ``eta(eps) = 0.9 eps theta(eps)`` with ``theta(eps)`` the convexity
    modulus at ``0.8 eps`` (floored at 1e-9); ``eta_ball`` is the modulus
    itself, which turns a near-support inequality into a distance bound.
    """

    def __init__(self, space: NormedSpace):
        self.space = space
        self._delta = _uc_delta(space)

    def theta(self, epsilon: float) -> float:
        return max(self._delta(0.8 * epsilon), 1e-9)

    def eta(self, epsilon: float) -> float:
        return 0.9 * epsilon * self.theta(epsilon)

    def eta_ball(self, epsilon: float) -> float:
        return self._delta(epsilon)

    def witness(self, series: ConvexSeries, epsilon: float,
                slack: float = 0.0) -> AhspWitness:
        return finite_dim_witness(self.space, series, epsilon,
                                  self.eta(epsilon), slack=slack)

    def witness_ball(self, weights, points, functional, epsilon):
        space = self.space
        w_star = space.coerce(functional)
        if abs(space.dual_norm(w_star) - 1.0) > TOL_SPHERE:
            raise RangeError("witness_ball requires a unit functional")
        bar = 1.0 - self.eta_ball(epsilon)
        v = space.attaining_vector(w_star)
        for j, p in enumerate(points):
            pv = space.coerce(p)
            val = float(np.real(space.pairing(w_star, pv)))
            if not val > bar - 1e-12:
                raise HypothesisError(
                    f"point {j}: Re w*(p) = {val} is not above {bar}")
            d = space.norm(pv - v)
            if not d < epsilon + 1e-12:
                raise OracleViolation(
                    f"point {j}: face distance {d} is not below {epsilon}")
        return tuple(range(len(points))), [v] * len(points), w_star


class PolyhedralPlaneAhspOracle(AhspOracle):
    """Witnesses in a plane with a polyhedral generator.

    Faces are segments between sphere vertices; the face gap g bounds how
    far a unit vector with value above ``1 - theta`` can sit from the face
    (by ``2 theta / g``), so ``theta(eps) = 0.45 g eps`` keeps projections
    inside ``0.9 eps``.
    """

    def __init__(self, space: PlaneSpace):
        if space.generator.is_smooth:
            raise RangeError("use the uniformly convex oracle for smooth generators")
        self.space = space
        self.gap = space.generator.face_gap()

    def theta(self, epsilon: float) -> float:
        return max(0.45 * self.gap * epsilon, 1e-9)

    def eta(self, epsilon: float) -> float:
        return 0.9 * epsilon * self.theta(epsilon)

    def eta_ball(self, epsilon: float) -> float:
        return self.theta(epsilon)

    def witness(self, series: ConvexSeries, epsilon: float,
                slack: float = 0.0) -> AhspWitness:
        return finite_dim_witness(self.space, series, epsilon,
                                  self.eta(epsilon), slack=slack)

    def witness_ball(self, weights, points, functional, epsilon):
        space = self.space
        w_star = space.coerce(functional)
        if abs(space.dual_norm(w_star) - 1.0) > TOL_SPHERE:
            raise RangeError("witness_ball requires a unit functional")
        bar = 1.0 - self.eta_ball(epsilon)
        out = []
        for j, p in enumerate(points):
            pv = space.coerce(p)
            val = float(np.real(space.pairing(w_star, pv)))
            if not val > bar - 1e-12:
                raise HypothesisError(
                    f"point {j}: Re w*(p) = {val} is not above {bar}")
            z = _polyhedral_face_point(space, w_star, pv)
            d = space.norm(pv - z)
            if not d < epsilon + 1e-12:
                raise OracleViolation(
                    f"point {j}: face distance {d} is not below {epsilon}")
            out.append(z)
        return tuple(range(len(points))), out, w_star


def ahsp_oracle_for(space: NormedSpace) -> AhspOracle:
    """The built-in witness oracle matching the space's geometry."""
    if space.kind == "absolute2" and not space.generator.is_smooth:
        return PolyhedralPlaneAhspOracle(space)
    return UniformlyConvexAhspOracle(space)


def plane_ahsp_oracle(f: AbsoluteNorm2) -> AhspOracle:
    return ahsp_oracle_for(PlaneSpace(f))


# -- two-summand pipeline ---------------------------------------------------


@dataclass(frozen=True)
class EtaPolicy:
    """Parameter block of the two-summand witness.

    ``raw_s``/``raw_r`` are 0.9 times the binding strict bounds
    (``s < min(delta/2, eta1/2)``, ``r < min(delta/2, s^2 eta1)``,
    ``eps1 < eps/8``, ``eps0 < r eps/8``); floors lift ``s`` and ``r`` out
    of float-noise territory, flagged when active — downstream inequalities
    are then carried by the runtime certificates, not the raw chain.
    """

    epsilon: float
    epsilon1: float
    eta1: float
    delta: float
    s: float
    r: float
    epsilon0: float
    eta0: float
    raw_s: float
    raw_r: float
    s_floored: bool
    r_floored: bool


def eta_policy(f: AbsoluteNorm2, oracle_M: AhspOracle, oracle_N: AhspOracle,
               epsilon: float, s_floor: float = AHSP_S_FLOOR,
               r_floor: float = AHSP_R_FLOOR) -> EtaPolicy:
    if not 0.0 < epsilon < 1.0:
        raise RangeError(f"epsilon must lie in (0, 1), got {epsilon}")
    epsilon1 = 0.9 * epsilon / 8.0
    eta1 = min(oracle_M.eta_ball(epsilon1), oracle_N.eta_ball(epsilon1))
    delta = min(lemma_fact_delta(f, epsilon / 5.0),
                lemma_fact_delta(f.swapped(), epsilon / 5.0))
    raw_s = 0.9 * min(delta / 2.0, eta1 / 2.0)
    s = min(max(raw_s, s_floor), 0.45)
    raw_r = 0.9 * min(delta / 2.0, s * s * eta1)
    r = min(max(raw_r, r_floor), s)
    epsilon0 = 0.9 * r * epsilon / 8.0
    eta0 = plane_ahsp_oracle(f).eta(epsilon0)
    return EtaPolicy(epsilon, epsilon1, eta1, delta, s, r, epsilon0, eta0,
                     raw_s, raw_r, s > raw_s, r > raw_r)


def direct_sum_space(M: NormedSpace, N: NormedSpace,
                     f: AbsoluteNorm2) -> DirectSumSpace:
    return DirectSumSpace([M, N], Absolute2Lattice(f))


def direct_sum_witness(M: NormedSpace, N: NormedSpace, f: AbsoluteNorm2,
                       series: ConvexSeries, epsilon: float,
                       oracle_M: AhspOracle | None = None,
                       oracle_N: AhspOracle | None = None,
                       policy: EtaPolicy | None = None) -> AhspWitness:
    """Witness for a series of unit vectors in ``M (+)_f N``.

    Pipeline: plane-level witness on the block-norm profiles; lift to unit
    vectors with the witnessed profiles; filter the heavy set against the
    norming functional of the lifted mass; split that functional into its
    two dual components and branch on which components are tiny.  Each
    branch assembles face points and a functional whose value on them is
    exactly one; every inequality the construction relies on is emitted as
    a certificate, and the final witness re-passes the standalone verifier.
    """
    oracle_M = oracle_M or ahsp_oracle_for(M)
    oracle_N = oracle_N or ahsp_oracle_for(N)
    pol = policy or eta_policy(f, oracle_M, oracle_N, epsilon)
    X = direct_sum_space(M, N, f)
    plane = PlaneSpace(f)
    certs: list[Certificate] = []

    pts = [X.coerce(p) for p in series.payload]
    total = sum(w * p for w, p in zip(series.weights, pts))
    total_norm = X.norm(total)
    certs.append(check("series-hypothesis", total_norm, ">=", 1.0 - pol.eta0,
                       tol=DIRECT_SUM_SLACK))
    if not certs[-1].passed:
        raise HypothesisError(
            f"|sum a_k x_k| = {total_norm} is not above 1 - eta0 = "
            f"{1.0 - pol.eta0} (slack {DIRECT_SUM_SLACK})")

    profiles = np.array([X.profile(p) for p in pts])
    w2 = finite_dim_witness(plane, ConvexSeries(series.weights, profiles),
                            pol.epsilon0, pol.eta0, slack=DIRECT_SUM_SLACK)
    A = w2.indices
    rs = {k: w2.points[j] for j, k in enumerate(A)}
    al, be = (float(v) for v in plane.coerce(w2.functional))

    m0 = M.canonical_unit()
    n0 = N.canonical_unit()
    m_hat: dict[int, np.ndarray] = {}
    n_hat: dict[int, np.ndarray] = {}
    y: dict[int, np.ndarray] = {}
    coord_err_1 = coord_err_2 = lift_err = 0.0
    for k in A:
        Pk, Qk = X.split(pts[k])
        a_k, b_k = M.norm(Pk), N.norm(Qk)
        m_hat[k] = Pk / a_k if a_k > 0.0 else m0
        n_hat[k] = Qk / b_k if b_k > 0.0 else n0
        r_k, s_k = float(rs[k][0]), float(rs[k][1])
        y[k] = X.embed([r_k * m_hat[k], s_k * n_hat[k]])
        coord_err_1 = max(coord_err_1, abs(r_k - a_k))
        coord_err_2 = max(coord_err_2, abs(s_k - b_k))
        lift_err = max(lift_err, X.norm(y[k] - pts[k]))
    certs.append(check("profile-error-first", coord_err_1, "<", pol.epsilon0))
    certs.append(check("profile-error-second", coord_err_2, "<", pol.epsilon0))
    certs.append(check("lifted-point-distance", lift_err, "<=", pol.epsilon0,
                       tol=1e-12))

    lifted_sum = sum(series.weights[k] * y[k] for k in A)
    lifted_norm = X.norm(lifted_sum)
    certs.append(check("lifted-mass-norm", lifted_norm, ">",
                       1.0 - 4.0 * pol.epsilon0))
    x_star = X.norming_functional(lifted_sum)

    B = [k for k in A
         if float(np.real(X.pairing(x_star, y[k]))) > 1.0 - pol.r]
    mass_B = float(sum(series.weights[k] for k in B))
    certs.append(check("heavy-mass", mass_B, ">",
                       1.0 - 4.0 * pol.epsilon0 / pol.r))
    if not B:
        ensure(certs)
        raise InternalInvariantError("the heavy set is empty")

    m_star, n_star = X.split(x_star)
    mu, nu = M.dual_norm(m_star), N.dual_norm(n_star)
    split_gap_1 = max((mu * float(rs[k][0])
                       - float(np.real(M.pairing(m_star, float(rs[k][0]) * m_hat[k]))))
                      for k in B)
    split_gap_2 = max((nu * float(rs[k][1])
                       - float(np.real(N.pairing(n_star, float(rs[k][1]) * n_hat[k]))))
                      for k in B)
    certs.append(check("support-split-first", split_gap_1, "<=", pol.r,
                       tol=1e-12))
    certs.append(check("support-split-second", split_gap_2, "<=", pol.r,
                       tol=1e-12))

    weights_B = [float(series.weights[k]) for k in B]

    if mu <= pol.s:
        indices, points, functional = _tiny_side_branch(
            X, M, N, f, pol, certs, series, B, weights_B, rs, m_hat, n_hat,
            n_star, nu, oracle_N, first_tiny=True)
    elif nu <= pol.s:
        indices, points, functional = _tiny_side_branch(
            X, M, N, f, pol, certs, series, B, weights_B, rs, m_hat, n_hat,
            m_star, mu, oracle_M, first_tiny=False)
    else:
        indices, points, functional = _both_sides_branch(
            X, M, N, pol, certs, series, B, rs, m_hat, n_hat,
            m_star, mu, n_star, nu, oracle_M, oracle_N, al, be)

    dist_max = max(X.norm(points[j] - pts[k]) for j, k in enumerate(indices))
    certs.append(check("witness-distance-final", dist_max, "<", epsilon))
    witness = AhspWitness(X, indices, points, functional, epsilon)
    final = verify_ahsp_witness(series, witness)
    certs.extend(final)
    ensure(certs)
    return AhspWitness(X, indices, points, functional, epsilon, tuple(certs))


def _tiny_side_branch(X, M, N, f, pol, certs, series, B, weights_B, rs,
                      m_hat, n_hat, active_star, active_norm, active_oracle,
                      first_tiny: bool):
    """One dual component is tiny: the witness lives (up to a completion
    coefficient) on the other summand.  ``first_tiny`` means the first
    summand's dual component is the tiny one, so the second is active."""
    side = "second" if first_tiny else "first"
    active_space = N if first_tiny else M
    passive_hat = m_hat if first_tiny else n_hat
    active_hat = n_hat if first_tiny else m_hat
    prof_active = (lambda k: float(rs[k][1])) if first_tiny \
        else (lambda k: float(rs[k][0]))
    prof_passive = (lambda k: float(rs[k][0])) if first_tiny \
        else (lambda k: float(rs[k][1]))

    min_active_prof = min(prof_active(k) for k in B)
    certs.append(check(f"{side}-profile-large", min_active_prof, ">=",
                       1.0 - pol.r - pol.s, tol=1e-12))
    a_hat_star = active_space.coerce(active_star) / active_norm
    active_pts = [prof_active(k) * active_hat[k] for k in B]
    min_val = min(float(np.real(active_space.pairing(a_hat_star, p)))
                  for p in active_pts)
    certs.append(check(f"{side}-component-hypothesis", min_val, ">",
                       1.0 - pol.eta1))

    kept, face_pts, out_star = active_oracle.witness_ball(
        weights_B, active_pts, a_hat_star, pol.epsilon1)
    C = [B[j] for j in kept]
    mass_C = float(sum(series.weights[k] for k in C))
    certs.append(check("witness-mass-chain", mass_C, ">",
                       1.0 - pol.epsilon1 - 4.0 * pol.epsilon0 / pol.r))

    eps = pol.epsilon
    completion_err = 0.0
    points = []
    for j, k in zip(kept, C):
        r_k, s_k = float(rs[k][0]), float(rs[k][1])
        if first_tiny:
            t = boundary_completion(f, r_k, s_k, "second_coord")
            a_k = math.copysign(min(abs(r_k), abs(t)), r_k) if r_k else 0.0
            completion_err = max(completion_err, abs(a_k - r_k))
            points.append(X.embed([a_k * passive_hat[k], face_pts[j]]))
        else:
            t = boundary_completion(f, r_k, s_k, "first_coord")
            b_k = math.copysign(min(abs(s_k), abs(t)), s_k) if s_k else 0.0
            completion_err = max(completion_err, abs(b_k - s_k))
            points.append(X.embed([face_pts[j], b_k * passive_hat[k]]))
    certs.append(check("completion-error", completion_err, "<=", eps / 5.0,
                       tol=1e-9))
    if first_tiny:
        functional = np.concatenate([np.zeros(M.dim),
                                     active_space.coerce(out_star)])
    else:
        functional = np.concatenate([active_space.coerce(out_star),
                                     np.zeros(N.dim)])
    bound = eps / 5.0 + pol.epsilon1 + 2.0 * pol.epsilon0
    dmax = max(X.norm(points[j] - X.coerce(series.payload[k]))
               for j, k in enumerate(C)) if C else 0.0
    certs.append(check("witness-distance-chain", dmax, "<=", bound, tol=1e-12))
    return tuple(C), tuple(points), functional


def _both_sides_branch(X, M, N, pol, certs, series, B, rs,
                       m_hat, n_hat, m_star, mu, n_star, nu,
                       oracle_M, oracle_N, al, be):
    """Both dual components are substantial: combine component witnesses on
    the indices where each profile coordinate is large, patching the small
    ones with the other side's canonical attaining vector."""
    s = pol.s
    B1 = [k for k in B if float(rs[k][0]) >= s]
    C1 = [k for k in B if float(rs[k][1]) >= s]
    missing_1 = sum(1 for k in B if k not in B1 and k not in C1)
    missing_2 = sum(1 for k in B if k not in C1 and k not in B1)
    certs.append(check("split-first-covered", float(missing_1), "<=", 0.0))
    certs.append(check("split-second-covered", float(missing_2), "<=", 0.0))

    m_hat_star = M.coerce(m_star) / mu
    n_hat_star = N.coerce(n_star) / nu
    if B1:
        min_m = min(float(np.real(M.pairing(m_hat_star, m_hat[k]))) for k in B1)
        certs.append(check("first-component-hypothesis", min_m, ">",
                           1.0 - pol.eta1))
        keptM, u_pts, m1_star = oracle_M.witness_ball(
            [float(series.weights[k]) for k in B1],
            [m_hat[k] for k in B1], m_hat_star, pol.epsilon1)
        D1 = {B1[j]: u_pts[i] for i, j in enumerate(keptM)}
        u0 = M.attaining_vector(m1_star)
    else:
        D1 = {}
        u0 = M.canonical_unit()
        m1_star = M.norming_functional(u0)
    if C1:
        min_n = min(float(np.real(N.pairing(n_hat_star, n_hat[k]))) for k in C1)
        certs.append(check("second-component-hypothesis", min_n, ">",
                           1.0 - pol.eta1))
        keptN, v_pts, n1_star = oracle_N.witness_ball(
            [float(series.weights[k]) for k in C1],
            [n_hat[k] for k in C1], n_hat_star, pol.epsilon1)
        F1 = {C1[j]: v_pts[i] for i, j in enumerate(keptN)}
        v0 = N.attaining_vector(n1_star)
    else:
        F1 = {}
        v0 = N.canonical_unit()
        n1_star = N.norming_functional(v0)

    core = [k for k in B if k in D1 and k in F1]
    patch_first = [k for k in B if k not in B1 and k in F1]
    patch_second = [k for k in B if k not in C1 and k in D1]
    overlap = (len(set(core) & set(patch_first))
               + len(set(core) & set(patch_second))
               + len(set(patch_first) & set(patch_second)))
    certs.append(check("pieces-disjoint", float(overlap), "<=", 0.0))

    C = sorted(core + patch_first + patch_second)
    mass_C = float(sum(series.weights[k] for k in C))
    certs.append(check("witness-mass-chain", mass_C, ">",
                       1.0 - 4.0 * pol.epsilon0 / pol.r - 4.0 * pol.epsilon1))

    points = []
    d_core = d_first = d_second = 0.0
    for k in C:
        r_k, s_k = float(rs[k][0]), float(rs[k][1])
        if k in core:
            z = X.embed([r_k * D1[k], s_k * F1[k]])
            d_core = max(d_core, X.norm(z - X.coerce(series.payload[k])))
        elif k in patch_first:
            z = X.embed([r_k * u0, s_k * F1[k]])
            d_first = max(d_first, X.norm(z - X.coerce(series.payload[k])))
        else:
            z = X.embed([r_k * D1[k], s_k * v0])
            d_second = max(d_second, X.norm(z - X.coerce(series.payload[k])))
        points.append(z)
    e0, e1 = pol.epsilon0, pol.epsilon1
    certs.append(check("witness-distance-core", d_core, "<=",
                       e1 + 2.0 * e0, tol=1e-12))
    certs.append(check("witness-distance-first-patch", d_first, "<=",
                       2.0 * s + e1 + 2.0 * e0, tol=1e-12))
    certs.append(check("witness-distance-second-patch", d_second, "<=",
                       e1 + 2.0 * s + 2.0 * e0, tol=1e-12))

    functional = np.concatenate([al * M.coerce(m1_star),
                                 be * N.coerce(n1_star)])
    return tuple(C), tuple(points), functional


def restrict_witness(sum_space: DirectSumSpace, witness: AhspWitness,
                     component: int) -> AhspWitness:
    """Push a sum-level witness down to one summand, doubling epsilon.

    Valid when the witnessed series lived (up to the witness distance) in
    that summand: the block norms of the witness points must exceed
    ``1 - eps`` there and stay below ``eps`` elsewhere, the functional's
    block must attain the block norm exactly, and the normalized blocks
    become the component witness at ``2 eps``.
    """
    if not 0 <= component < len(sum_space.components):
        raise RangeError(f"no component {component} in the sum")
    comp = sum_space.components[component]
    eps_half = witness.epsilon
    certs: list[Certificate] = []

    m_star = sum_space.split(sum_space.coerce(witness.functional))[component]
    mu = comp.dual_norm(m_star)
    if mu <= TOL_SPHERE:
        raise InternalInvariantError(
            "the functional vanishes on the target summand, which the "
            "projection bounds exclude")

    blocks = []
    min_inside = math.inf
    max_outside = 0.0
    max_support_gap = 0.0
    for z in witness.points:
        zb = sum_space.split(sum_space.coerce(z))
        block = zb[component]
        bn = comp.norm(block)
        rest = list(sum_space.profile(sum_space.coerce(z)))
        rest[component] = 0.0
        outside = sum_space.combiner.norm_of(np.array(rest))
        min_inside = min(min_inside, bn)
        max_outside = max(max_outside, outside)
        max_support_gap = max(
            max_support_gap,
            abs(float(np.real(comp.pairing(m_star, block))) - mu * bn))
        blocks.append((block, bn))
    certs.append(check("projection-dominant", min_inside, ">=",
                       1.0 - eps_half, tol=1e-12))
    certs.append(check("projection-remainder", max_outside, "<=", eps_half,
                       tol=1e-12))
    certs.append(check("support-equality", max_support_gap, "<=", 0.0,
                       tol=1e-9))
    ensure(certs)

    points = []
    for block, bn in blocks:
        if bn == 0.0:
            raise InternalInvariantError(
                "a witness point has no mass in the target summand")
        points.append(block / bn)
    functional = comp.coerce(m_star) / mu
    shift = max(comp.norm(p - b[0]) for p, b in zip(points, blocks))
    certs.append(check("restricted-point-shift", shift, "<=", eps_half,
                       tol=1e-12))
    return AhspWitness(comp, witness.indices, tuple(points), functional,
                       2.0 * eps_half, tuple(certs))
