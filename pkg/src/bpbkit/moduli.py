"""Moduli of convexity and of uniform monotonicity.

``convexity_modulus`` measures how deeply midpoints of well-separated unit
vectors sink into the ball: ``delta(eps) = inf {1 - |(x+y)/2| : |x| = |y| = 1,
|x - y| >= eps}``.  ``monotonicity_modulus`` measures how much norm a
nonnegative unit vector of a lattice must lose when a subset of coordinates
carrying norm more than ``eps`` is removed.

Closed forms are used for Euclidean and p-norms (Hanner's inequalities for
1 < p < 2, solved by bisection) and for the supported lattice kinds; a
seed-deterministic brute-force estimator (low-discrepancy sphere sampling
with chord-length refinement) covers everything else and doubles as the
independent check of the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .absolute import AbsoluteNorm2
from .errors import (NotUniformlyConvex, NotUniformlyMonotone, RangeError)
from .lattices import (Absolute2Lattice, FiniteLattice, LpLattice,
                       WeightedL1Lattice)
from .spaces import LatticeSpace, NormedSpace

_ALPHA_FLOOR = 1e-9


@dataclass(frozen=True)
class ModulusCurve:
    """Sampled modulus curve of one space.

    ``kind`` is ``"convexity"`` or ``"monotonicity"``; ``space_id`` is a
    short human-readable descriptor; ``samples`` holds (epsilon, value)
    pairs; ``method`` records whether values came from a closed form or the
    brute-force estimator.
    """

    kind: str
    space_id: str
    samples: tuple[tuple[float, float], ...]
    method: str

    def to_json(self) -> dict:
        return {"kind": self.kind, "space_id": self.space_id,
                "method": self.method,
                "samples": [[e, v] for e, v in self.samples]}

    def to_csv(self) -> str:
        lines = ["epsilon,value"]
        lines += [f"{e!r},{v!r}" for e, v in self.samples]
        return "\n".join(lines) + "\n"


def space_descriptor(space) -> str:
    """Compact identifier used in curves and reports."""
    kind = getattr(space, "kind", None)
    if kind == "euclidean":
        tag = "C" if space.scalar_field == "complex" else "R"
        return f"euclidean[{tag}]^{space.dim}"
    if kind == "lp":
        return f"lp({space.p})^{space.dim}"
    if kind == "absolute2":
        return f"absolute2({space.generator.kind})"
    if kind == "lattice":
        return f"lattice[{space_descriptor(space.lattice)}]"
    if kind == "direct_sum":
        inner = ",".join(space_descriptor(c) for c in space.components)
        return f"sum[{space_descriptor(space.combiner)}]({inner})"
    if isinstance(space, LpLattice):
        return f"lp({space.p})^{space.dim}"
    if isinstance(space, WeightedL1Lattice):
        return f"wl1^{space.dim}"
    if isinstance(space, Absolute2Lattice):
        return f"absolute2({space.norm2.kind})"
    return type(space).__name__


# -- convexity --------------------------------------------------------------


def _hanner_delta(p: float, eps: float) -> float:
    """Modulus of convexity of an L_p norm, 1 < p < inf.

    For p >= 2: 1 - (1 - (eps/2)^p)^(1/p) exactly.  For 1 < p < 2 the
    modulus solves (1 - d + eps/2)^p + |1 - d - eps/2|^p = 2 (sharp by
    Hanner's inequality); located by bisection on d.
    """
    if p >= 2.0:
        return 1.0 - (1.0 - (eps / 2.0) ** p) ** (1.0 / p)

    def g(d: float) -> float:
        return (1.0 - d + eps / 2.0) ** p + abs(1.0 - d - eps / 2.0) ** p - 2.0

    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _halton_directions(dim: int, count: int) -> np.ndarray:
    """Low-discrepancy direction samples via inverse-normal Halton points."""
    from scipy.stats import norm as _norm
    from scipy.stats.qmc import Halton
    eng = Halton(d=dim, scramble=True, seed=1234)
    u = eng.random(count)
    z = _norm.ppf(np.clip(u, 1e-12, 1.0 - 1e-12))
    return z


def _brute_force_convexity(space: NormedSpace, eps: float,
                           resolution: int = 1000) -> float:
    """Estimator: sample unit pairs, slide one endpoint along the sphere to
    chord length exactly eps, and take the worst midpoint depth."""
    dim = space.dim
    if dim == 1:
        # The only unit pairs are +-1; separated pairs have midpoint 0.
        return 1.0 if eps > 0.0 else 0.0
    dirs = _halton_directions(2 * dim, resolution)
    best = 1.0
    for row in dirs:
        a = row[:dim]
        b = row[dim:]
        na, nb = space.norm(a), space.norm(b)
        if na == 0.0 or nb == 0.0:
            continue
        x = np.asarray(a, dtype=float) / na
        y0 = np.asarray(b, dtype=float) / nb
        # Walk y from x (chord 0) toward y0 resp. -y0 until the chord is eps.
        for target in (y0, -y0):
            if space.norm(x - target) < eps:
                continue
            lo, hi = 0.0, 1.0
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                cand = (1.0 - mid) * x + mid * target
                ncand = space.norm(cand)
                if ncand == 0.0:
                    hi = mid
                    continue
                cand = cand / ncand
                if space.norm(x - cand) < eps:
                    lo = mid
                else:
                    hi = mid
            cand = (1.0 - hi) * x + hi * target
            ncand = space.norm(cand)
            if ncand == 0.0:
                continue
            y = cand / ncand
            if space.norm(x - y) >= eps * (1.0 - 1e-9):
                best = min(best, 1.0 - space.norm((x + y) / 2.0))
    return max(best, 0.0)


def convexity_modulus(space: NormedSpace, epsilon: float,
                      method: str = "auto", resolution: int = 1000) -> float:
    """Modulus of convexity at ``epsilon`` in (0, 2].

    ``method="closed_form"`` requires a uniformly convex closed-form kind
    (euclidean, or lp with 1 < p < inf) and raises
    :class:`NotUniformlyConvex` for lp(1)/lp(inf); ``"brute_force"`` runs the
    sampling estimator on any kind; ``"auto"`` prefers the closed form and
    falls back to brute force.
    """
    if not 0.0 < epsilon <= 2.0:
        raise RangeError(f"epsilon must lie in (0, 2], got {epsilon}")
    if method not in ("auto", "closed_form", "brute_force"):
        raise RangeError(f"unknown method {method!r}")
    if method != "brute_force":
        if space.kind == "euclidean":
            return 1.0 - math.sqrt(max(0.0, 1.0 - epsilon ** 2 / 4.0))
        if space.kind == "lp":
            if space.p in (1.0, math.inf):
                if method == "closed_form":
                    raise NotUniformlyConvex(
                        f"lp({space.p}) has flat faces; no closed-form modulus")
            elif space.dim == 1:
                return 1.0
            else:
                return _hanner_delta(space.p, epsilon)
        elif method == "closed_form":
            raise NotUniformlyConvex(
                f"no closed-form convexity modulus for kind {space.kind!r}")
    return _brute_force_convexity(space, epsilon, resolution)


# -- uniform monotonicity ---------------------------------------------------


def _sup_height_at(n: AbsoluteNorm2, cut: float) -> float:
    """sup of the second coordinate over unit pairs (a, b) >= 0 with a >= cut."""
    if n.kind == "lp":
        if n.p == math.inf:
            return 1.0 if cut <= 1.0 else 0.0
        if cut > 1.0:
            return 0.0
        return (1.0 - cut ** n.p) ** (1.0 / n.p)
    worst = None
    verts = n._vertices
    for (x0, y0), (x1, y1) in zip(verts, verts[1:]):
        for x, y in ((x0, y0), (x1, y1)):
            if x >= cut - 1e-15:
                worst = y if worst is None else max(worst, y)
        if (x0 - cut) * (x1 - cut) < 0.0:
            t = (cut - x0) / (x1 - x0)
            y = y0 + t * (y1 - y0)
            worst = y if worst is None else max(worst, y)
    return 0.0 if worst is None else worst


def _two_block_residual(lattice: FiniteLattice, epsilon: float,
                        size_a: int) -> float:
    """Largest norm retained off a subset carrying norm epsilon, for the
    supported lattice kinds (their symmetry makes it depend only on sizes)."""
    if isinstance(lattice, LpLattice):
        if lattice.p == math.inf:
            return 1.0
        return (1.0 - epsilon ** lattice.p) ** (1.0 / lattice.p)
    if isinstance(lattice, WeightedL1Lattice):
        return 1.0 - epsilon
    if isinstance(lattice, Absolute2Lattice):
        n = lattice.norm2
        if size_a == 1:
            # A = {first}: completion height over first coordinate >= eps.
            return _sup_height_at(n, epsilon)
        return _sup_height_at(n.swapped(), epsilon)
    raise RangeError(f"unsupported lattice kind {type(lattice).__name__}")


def monotonicity_modulus(E, epsilon: float) -> float:
    """Uniform-monotonicity modulus of a finite lattice at ``epsilon`` in (0,1).

    Returns the largest alpha such that every nonnegative unit vector that
    carries norm more than ``epsilon`` on some subset retains norm less than
    ``1 - alpha`` off that subset; computed by exact enumeration over
    subsets with the per-kind two-block reduction.  Raises
    :class:`NotUniformlyMonotone` when alpha is indistinguishable from zero.
    """
    if not 0.0 < epsilon < 1.0:
        raise RangeError(f"epsilon must lie in (0, 1), got {epsilon}")
    if isinstance(E, FiniteLattice):
        lattice = E
    elif isinstance(E, LatticeSpace):
        lattice = E.lattice
    elif getattr(E, "kind", None) == "lp":
        lattice = LpLattice(E.dim, E.p)
    elif getattr(E, "kind", None) == "absolute2":
        lattice = Absolute2Lattice(E.generator)
    else:
        raise RangeError(f"expected a finite lattice, got {type(E).__name__}")
    worst = 0.0
    for size_a in range(1, lattice.dim + 1):
        if size_a == lattice.dim:
            # Removing everything retains nothing.
            continue
        worst = max(worst, _two_block_residual(lattice, epsilon, size_a))
    if lattice.dim == 1:
        worst = 0.0
    alpha = 1.0 - worst
    if alpha <= _ALPHA_FLOOR:
        raise NotUniformlyMonotone(
            f"{space_descriptor(lattice)} retains norm {worst} off a subset "
            f"carrying {epsilon}; alpha is indistinguishable from 0")
    return alpha


# -- curves -----------------------------------------------------------------


def convexity_curve(space: NormedSpace, epsilons, method: str = "auto",
                    resolution: int = 1000) -> ModulusCurve:
    samples = tuple((float(e), convexity_modulus(space, float(e), method,
                                                 resolution))
                    for e in epsilons)
    used = ("closed_form"
            if method != "brute_force" and space.kind in ("euclidean", "lp")
            and getattr(space, "p", 2.0) not in (1.0, math.inf)
            else "brute_force")
    return ModulusCurve("convexity", space_descriptor(space), samples, used)


def monotonicity_curve(E, epsilons) -> ModulusCurve:
    samples = tuple((float(e), monotonicity_modulus(E, float(e)))
                    for e in epsilons)
    return ModulusCurve("monotonicity", space_descriptor(E), samples,
                        "closed_form")
