"""Lattice-combined sums: Köthe duality and the sequence-space witness.

A lattice sum combines component spaces through a monotone lattice norm of
their block norms.  The dual space carries the Köthe dual of the lattice
with component duals inside; this module checks that duality numerically,
builds norming functionals the way the one-norming-set lemma assembles
them, and runs the full witness pipeline for series in the sum:

1. a parameter block (eta, alpha, r, eps', eta') derived from the shared
   component face modulus and the lattice's monotonicity modulus;
2. a lattice-level witness on the profiles of the series;
3. lifted points, a norming element, and a mass filter at threshold r;
4. per-block defect numbers selecting the supports where the norming
   functional nearly attains, patched face points with one common
   functional per component, and the assembled witness whose functional
   takes the value one on every witness point exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ahsp import (AhspOracle, AhspWitness, UniformlyConvexAhspOracle,
                   ahp_oracle_uniformly_convex, verify_ahsp_witness)
from .bpb import HYPOTHESIS_SLACK, ConvexSeries
from .certs import Certificate, check, ensure
from .errors import (DegenerateInput, HypothesisError, RangeError)
from .lattices import FiniteLattice, LpLattice, WeightedL1Lattice
from .moduli import monotonicity_modulus
from .spaces import DirectSumSpace, LatticeSpace, LpSpace, NormedSpace
from .util import TOL_SPHERE

#: Additive hypothesis slack at the pipeline entry (the honest eta'
#: collapses below float resolution; all downstream bounds are re-checked).
LATTICE_SUM_SLACK = 1e-8


def lattice_sum_space(E: FiniteLattice,
                      components: list[NormedSpace]) -> DirectSumSpace:
    """The sum of ``components`` normed by ``E`` applied to block norms."""
    return DirectSumSpace(components, E)


def kothe_dual_norm(E: FiniteLattice, x) -> float:
    """The Köthe dual norm ``sup { sum |x_k y_k| : |y|_E <= 1 }``.

    Exact through each lattice's closed-form dual.
    """
    arr = np.abs(np.asarray(x, dtype=float).reshape(-1))
    if arr.size != E.dim:
        raise RangeError(f"expected {E.dim} coordinates, got {arr.size}")
    return E.dual_norm_of(arr)


def sampled_dual_norm(E: FiniteLattice, x, rng: np.random.Generator,
                      samples: int = 2000) -> float:
    """Brute-force lower estimate of the Köthe dual norm over sampled B_E."""
    arr = np.abs(np.asarray(x, dtype=float).reshape(-1))
    best = 0.0
    for _ in range(samples):
        y = np.abs(rng.standard_normal(E.dim))
        ny = E.norm_of(y)
        if ny == 0.0:
            continue
        best = max(best, float(np.dot(arr, y / ny)))
    return best


def duality_isometry_check(Z: DirectSumSpace, x_star,
                           seed: int = 0, samples: int = 200) -> list[Certificate]:
    """Compare the dual-sum norm of a functional with its action on the ball.

    The closed-form dual norm (Köthe dual of the component dual norms) is
    checked against (a) the value achieved at the constructively assembled
    attaining vector and (b) a sampled-and-block-aligned sweep of ball
    points, which can only fall below the dual norm if the isometry holds.
    """
    f = Z.coerce(x_star)
    lhs = Z.dual_norm(f)
    if lhs == 0.0:
        raise DegenerateInput("the zero functional has no norming direction")
    att = Z.attaining_vector(f)
    achieved = float(np.real(Z.pairing(f, att)))
    rng = np.random.default_rng(np.random.SeedSequence([987651, seed]))
    best = 0.0
    for _ in range(samples):
        raw = rng.standard_normal(Z.dim)
        x = raw / Z.norm(raw)
        best = max(best, abs(float(np.real(Z.pairing(f, x)))))
        aligned = []
        for comp, b, fb in zip(Z.components, Z.split(x), Z.split(f)):
            bn = comp.norm(b)
            if bn > 0.0 and comp.dual_norm(fb) > 0.0:
                aligned.append(bn * comp.attaining_vector(fb))
            else:
                aligned.append(b)
        xa = Z.embed(aligned)
        na = Z.norm(xa)
        if na > 0.0:
            best = max(best, abs(float(np.real(Z.pairing(f, xa)))) / na)
    return [
        check("duality-attainer-unit", abs(Z.norm(att) - 1.0), "<=", 0.0,
              tol=TOL_SPHERE),
        check("duality-gap", abs(lhs - achieved), "<=", 0.0, tol=1e-4),
        check("duality-ball-bound", best, "<=", lhs, tol=1e-9),
    ]


@dataclass(frozen=True)
class NormingElement:
    """A dual-unit functional assembled blockwise from a lattice norming
    functional, per-component norming functionals, and aligning scalars."""

    e_star: np.ndarray
    lambdas: np.ndarray
    component_functionals: tuple[np.ndarray, ...]
    assembled: np.ndarray
    certificates: tuple[Certificate, ...] = field(default_factory=tuple)


def build_norming_element(Z: DirectSumSpace, z, epsilon: float) -> NormingElement:
    """A functional with ``Re z*(z) > |z| - epsilon`` built as the
    one-norming-set construction prescribes.

    ``e*`` norms the block-norm profile in the Köthe dual; each nonzero
    block contributes its exact norming functional (within the per-index
    slack ``epsilon / ((e*_k + 1) 2^k)``), zero blocks the norming
    functional of the component's canonical direction; the aligning
    scalars are trivial for real scalars.
    """
    if epsilon <= 0.0:
        raise RangeError(f"epsilon must be positive, got {epsilon}")
    zv = Z.coerce(z)
    prof = Z.profile(zv)
    total = Z.combiner.norm_of(prof)
    if total == 0.0:
        raise DegenerateInput("the zero vector has no norming element")
    e_star = Z.combiner.norming_of(prof)
    blocks = Z.split(zv)
    funcs = []
    slack_excess = -math.inf
    for k, (comp, b) in enumerate(zip(Z.components, blocks)):
        bn = comp.norm(b)
        if bn > 0.0:
            fk = comp.norming_functional(b)
            gap = bn - float(np.real(comp.pairing(fk, b)))
        else:
            fk = comp.norming_functional(comp.canonical_unit())
            gap = 0.0
        budget = epsilon / ((float(e_star[k]) + 1.0) * 2.0 ** (k + 1))
        slack_excess = max(slack_excess, gap - budget)
        funcs.append(fk)
    lambdas = np.ones(len(funcs))
    assembled = Z.embed([float(e_star[k]) * lambdas[k] * funcs[k]
                         for k in range(len(funcs))])
    value = float(np.real(Z.pairing(assembled, zv)))
    certs = (
        check("norming-dual-unit", abs(Z.dual_norm(assembled) - 1.0), "<=",
              0.0, tol=TOL_SPHERE),
        check("norming-component-slack", slack_excess, "<=", 0.0),
        check("norming-value", value, ">", total - epsilon),
    )
    ensure(list(certs))
    return NormingElement(e_star, lambdas, tuple(funcs), assembled, certs)


class NonnegAdditiveProfileOracle(AhspOracle):
    """Witness oracle for L1-type lattices acting on nonnegative unit
    vectors: the norm is additive there, so the series points are their own
    witness and the dual functional is the weight vector."""

    def __init__(self, space: LpSpace | NormedSpace, functional: np.ndarray):
        self.space = space
        self._functional = np.asarray(functional, dtype=float)

    def eta(self, epsilon: float) -> float:
        return 0.9 * epsilon

    def eta_ball(self, epsilon: float) -> float:
        return 0.9 * epsilon

    def witness(self, series: ConvexSeries, epsilon: float,
                slack: float = 0.0) -> AhspWitness:
        pts = [self.space.coerce(p) for p in series.payload]
        for j, p in enumerate(pts):
            if float(p.min()) < -1e-12:
                raise RangeError(
                    f"point {j} has a negative coordinate; the additive "
                    "profile witness needs nonnegative points")
            if abs(self.space.norm(p) - 1.0) > TOL_SPHERE:
                raise RangeError(f"point {j} is not a unit vector")
        total = sum(w * p for w, p in zip(series.weights, pts))
        total_norm = self.space.norm(total)
        if not total_norm > 1.0 - self.eta(epsilon) - slack - HYPOTHESIS_SLACK:
            raise HypothesisError(
                f"|sum a_n x_n| = {total_norm} violates the entry hypothesis")
        indices = tuple(range(len(pts)))
        witness = AhspWitness(self.space, indices, tuple(pts),
                              self._functional, epsilon)
        report = verify_ahsp_witness(series, witness)
        return AhspWitness(self.space, indices, tuple(pts), self._functional,
                           epsilon, tuple(report))

    def witness_ball(self, weights, points, functional, epsilon):
        pts = [self.space.coerce(p) for p in points]
        return tuple(range(len(pts))), pts, self.space.coerce(functional)


def default_profile_oracle(E: FiniteLattice) -> AhspOracle:
    """The lattice-level witness oracle used on block-norm profiles."""
    if isinstance(E, LpLattice) and E.p == 1.0:
        space = LpSpace(E.dim, 1.0)
        return NonnegAdditiveProfileOracle(space, np.ones(E.dim))
    if isinstance(E, WeightedL1Lattice):
        return NonnegAdditiveProfileOracle(LatticeSpace(E), E.weights.copy())
    if isinstance(E, LpLattice) and 1.0 < E.p < math.inf:
        return UniformlyConvexAhspOracle(LpSpace(E.dim, E.p))
    raise RangeError(
        "no built-in profile witness oracle for this lattice; pass one")


@dataclass(frozen=True)
class LatticeSumPolicy:
    """Parameter block of the lattice-sum witness: eta below the shared
    face modulus at eps/4, alpha below the monotonicity modulus at eps/4,
    the threshold r tied to both, and the profile-level (eps', eta')."""

    epsilon: float
    eta: float
    alpha: float
    r: float
    epsilon_prime: float
    eta_prime: float
    delta_quarter: float


def lattice_sum_policy(Z: DirectSumSpace, epsilon: float, component_ahp,
                       E_oracle: AhspOracle) -> LatticeSumPolicy:
    if not 0.0 < epsilon < 1.0:
        raise RangeError(f"epsilon must lie in (0, 1), got {epsilon}")
    delta_quarter = min(o.delta(epsilon / 4.0) for o in component_ahp)
    eta = 0.9 * min(epsilon / 4.0, delta_quarter)
    alpha = 0.9 * min(monotonicity_modulus(Z.combiner, epsilon / 4.0),
                      epsilon / 4.0)
    r = (1.0 + 2.0 * eta - alpha * eta) / (1.0 + 2.0 * eta)
    epsilon_prime = 0.9 * (1.0 - r) * epsilon / 3.0
    eta_prime = E_oracle.eta(epsilon_prime)
    return LatticeSumPolicy(epsilon, eta, alpha, r, epsilon_prime, eta_prime,
                            delta_quarter)


def lattice_sum_witness(Z: DirectSumSpace, series: ConvexSeries,
                        epsilon: float, E_oracle: AhspOracle | None = None,
                        component_ahp: list | None = None,
                        policy: LatticeSumPolicy | None = None) -> AhspWitness:
    """Witness for a series of unit vectors in a lattice sum.

    Requires component face oracles with one shared modulus and a witness
    oracle for the lattice itself; every inequality in the chain — profile
    witness distances, the norming-element value, the mass filter, defect
    sums, support masses, escaped mass, patched distances, and the exact
    value of the assembled functional — is emitted as a certificate and
    enforced before the witness is returned.
    """
    E = Z.combiner
    E_oracle = E_oracle or default_profile_oracle(E)
    component_ahp = component_ahp or [ahp_oracle_uniformly_convex(c)
                                      for c in Z.components]
    pol = policy or lattice_sum_policy(Z, epsilon, component_ahp, E_oracle)
    certs: list[Certificate] = []
    m = len(Z.components)

    pts = [Z.coerce(p) for p in series.payload]
    total = sum(w * p for w, p in zip(series.weights, pts))
    total_norm = Z.norm(total)
    certs.append(check("series-hypothesis", total_norm, ">=",
                       1.0 - pol.eta_prime, tol=LATTICE_SUM_SLACK))
    if not certs[-1].passed:
        raise HypothesisError(
            f"|sum a_n z_n| = {total_norm} is not above 1 - eta' = "
            f"{1.0 - pol.eta_prime} (slack {LATTICE_SUM_SLACK})")

    profiles = np.array([Z.profile(p) for p in pts])
    wE = E_oracle.witness(ConvexSeries(series.weights, profiles),
                          pol.epsilon_prime, slack=LATTICE_SUM_SLACK)
    A = wE.indices
    r_of = {n: np.asarray(wE.points[j], dtype=float)
            for j, n in enumerate(A)}
    r_star = np.asarray(wE.functional, dtype=float)
    neg = min(float(r_of[n].min()) for n in A)
    certs.append(check("profile-witness-nonneg", neg, ">=", 0.0, tol=1e-12))

    canon = [comp.canonical_unit() for comp in Z.components]
    u: dict[int, np.ndarray] = {}
    u_hat: dict[int, list[np.ndarray | None]] = {}
    lift_err = 0.0
    for n in A:
        blocks = Z.split(pts[n])
        new_blocks = []
        hats: list[np.ndarray | None] = []
        for k, (comp, b) in enumerate(zip(Z.components, blocks)):
            bn = comp.norm(b)
            direction = b / bn if bn > 0.0 else canon[k]
            hats.append(direction)
            new_blocks.append(float(r_of[n][k]) * direction)
        u[n] = Z.embed(new_blocks)
        u_hat[n] = hats
        lift_err = max(lift_err, Z.norm(u[n] - pts[n]))
    certs.append(check("lifted-point-distance", lift_err, "<",
                       pol.epsilon_prime, tol=1e-15))

    v_vec = sum(series.weights[n] * u[n] for n in A)
    norming = build_norming_element(Z, v_vec, pol.epsilon_prime)
    z_star = norming.assembled
    e_star = norming.e_star
    value = float(np.real(Z.pairing(z_star, v_vec)))
    certs.append(check("norming-element-value", value, ">=",
                       1.0 - pol.eta_prime - 2.0 * pol.epsilon_prime,
                       tol=LATTICE_SUM_SLACK))

    C = [n for n in A
         if float(np.real(Z.pairing(z_star, u[n]))) > pol.r]
    mass_C = float(sum(series.weights[n] for n in C))
    certs.append(check("selected-mass", mass_C, ">", 1.0 - 0.9 * epsilon))
    if not C:
        ensure(certs)

    z_star_blocks = Z.split(z_star)
    comp_funcs = norming.component_functionals
    defect_sum_max = -math.inf
    support_mass_min = math.inf
    residual_min = math.inf
    escaped_max = 0.0
    comp_support_min = math.inf
    B: dict[int, list[int]] = {}
    for n in C:
        u_blocks = Z.split(u[n])
        d = np.zeros(m)
        weights_k = np.zeros(m)
        for k, comp in enumerate(Z.components):
            un_norm = comp.norm(u_blocks[k])
            weights_k[k] = float(e_star[k]) * un_norm
            d[k] = weights_k[k] - float(np.real(comp.pairing(z_star_blocks[k],
                                                             u_blocks[k])))
        defect_sum_max = max(defect_sum_max, float(d.sum()))
        Bn = [k for k in range(m)
              if d[k] < pol.eta * weights_k[k]]
        B[n] = Bn
        support_mass_min = min(support_mass_min,
                               float(sum(weights_k[k] for k in Bn)))
        rn = r_of[n]
        inside = np.where(np.isin(np.arange(m), Bn), rn, 0.0)
        outside = rn - inside
        residual_min = min(residual_min, E.norm_of(inside))
        escaped_max = max(escaped_max, E.norm_of(outside))
        for k in Bn:
            comp = Z.components[k]
            comp_support_min = min(
                comp_support_min,
                float(np.real(comp.pairing(comp_funcs[k], u_hat[n][k]))))
    certs.append(check("defect-sum", defect_sum_max, "<=", 1.0 - pol.r,
                       tol=1e-12))
    certs.append(check("support-mass", support_mass_min, ">",
                       pol.r - (1.0 - pol.r) / pol.eta))
    certs.append(check("residual-mass", residual_min, ">", 1.0 - pol.alpha))
    certs.append(check("escaped-mass", escaped_max, "<=", epsilon / 4.0,
                       tol=1e-12))
    certs.append(check("component-support", comp_support_min, ">",
                       1.0 - pol.eta))

    covered = sorted({k for n in C for k in B[n]})
    y_star: dict[int, np.ndarray] = {}
    face_of: dict[tuple[int, int], np.ndarray] = {}
    oracle_by_k = {k: component_ahp[k] for k in range(m)}
    face_dist_max = 0.0
    face_value_dev = 0.0
    for k in covered:
        comp = Z.components[k]
        y_star[k] = oracle_by_k[k].upsilon(comp_funcs[k])
        for n in C:
            if k in B[n]:
                mk = oracle_by_k[k].face_point(y_star[k], u_hat[n][k])
                face_of[(n, k)] = comp.coerce(mk)
                face_dist_max = max(face_dist_max,
                                    comp.norm(face_of[(n, k)] - u_hat[n][k]))
                face_value_dev = max(
                    face_value_dev,
                    abs(float(np.real(comp.pairing(y_star[k],
                                                   face_of[(n, k)]))) - 1.0))
    certs.append(check("face-point-distance", face_dist_max, "<",
                       epsilon / 4.0, tol=1e-12))
    certs.append(check("face-point-value", face_value_dev, "<=", 0.0,
                       tol=TOL_SPHERE))
    for k in range(m):
        if k not in covered:
            comp = Z.components[k]
            y_star[k] = comp.norming_functional(canon[k])

    patch: dict[int, int] = {}
    for k in covered:
        patch[k] = min(n for n in C if k in B[n])

    points = []
    patched_excess = -math.inf
    patched_total_max = 0.0
    final_dist_max = 0.0
    value_dev = 0.0
    for n in C:
        rn = r_of[n]
        blocks = []
        for k, comp in enumerate(Z.components):
            if k in B[n]:
                direction = face_of[(n, k)]
                patched_excess = max(
                    patched_excess,
                    float(rn[k]) * comp.norm(direction - u_hat[n][k])
                    - (epsilon / 4.0) * float(rn[k]))
            elif k in covered:
                direction = face_of[(patch[k], k)]
            else:
                direction = canon[k]
            blocks.append(float(rn[k]) * direction)
        vn = Z.embed(blocks)
        points.append(vn)
        patched_total_max = max(patched_total_max, Z.norm(vn - u[n]))
        final_dist_max = max(final_dist_max, Z.norm(vn - pts[n]))
        value_dev = max(value_dev,
                        abs(float(np.dot(r_star, rn)) - 1.0))
    certs.append(check("patched-block-distance", patched_excess, "<=", 0.0,
                       tol=1e-12))
    certs.append(check("patched-distance", patched_total_max, "<=",
                       0.75 * epsilon, tol=1e-12))
    certs.append(check("witness-distance-final", final_dist_max, "<",
                       epsilon))
    certs.append(check("profile-value-exact", value_dev, "<=", 0.0,
                       tol=TOL_SPHERE))

    functional = Z.embed([float(r_star[k]) * y_star[k] for k in range(m)])
    witness = AhspWitness(Z, tuple(C), tuple(points), functional, epsilon)
    final = verify_ahsp_witness(series, witness)
    certs.extend(final)
    ensure(certs)
    return AhspWitness(Z, tuple(C), tuple(points), functional, epsilon,
                       tuple(certs))
