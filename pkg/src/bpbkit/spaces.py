"""Finite-dimensional normed spaces, functionals, and operators.

Five norm kinds are provided: ``euclidean`` (real or complex), ``lp``,
``absolute2`` (a plane normed by a two-dimensional absolute generator),
``lattice`` (R^n under a monotone 1-unconditional norm), and ``direct_sum``
(blocks combined by applying a lattice norm to the tuple of block norms).
Complex scalars are supported by the euclidean kind only; every other kind is
real.

Functionals are stored as coordinate vectors acting through the bilinear
pairing ``f(x) = sum_i f_i x_i`` (no conjugation), so for a complex euclidean
space the norming functional of ``x`` is ``conj(x)/|x|``.

Norming functionals and dual-attaining vectors are exact on every kind:
closed forms for euclidean/lp, vertex enumeration for polyhedral generators,
and the lattice-of-block-norms pairing for direct sums.  ``operator_norm``
has exact paths (one-dimensional domains, l1-like domains by column or block
maxima, euclidean-to-euclidean by largest singular value) and otherwise
returns a certified lower bound from multi-start duality-mapping ascent,
flagged as nonexact.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .absolute import AbsoluteNorm2, dual_exponent
from .errors import (ConfigError, DegenerateInput, DimensionError, NotOnSphere,
                     RangeError)
from .lattices import (Absolute2Lattice, FiniteLattice, LpLattice,
                       WeightedL1Lattice, lattice_from_params)
from .util import TOL_SPHERE


class NormedSpace(ABC):
    """A finite-dimensional real or complex normed space."""

    kind: str
    dim: int
    scalar_field: str  # "real" or "complex"

    # -- coercion ---------------------------------------------------------

    @property
    def dtype(self):
        return np.complex128 if self.scalar_field == "complex" else np.float64

    def coerce(self, x) -> np.ndarray:
        arr = np.asarray(x)
        if arr.shape == ():
            arr = arr.reshape(1)
        arr = arr.reshape(-1)
        if arr.size != self.dim:
            raise DimensionError(
                f"expected a vector of length {self.dim}, got {arr.size}")
        if self.scalar_field == "real" and np.iscomplexobj(arr):
            if np.any(arr.imag != 0.0):
                raise RangeError("this space is real; complex coordinates are invalid")
            arr = arr.real
        return arr.astype(self.dtype)

    # -- core operations --------------------------------------------------

    @abstractmethod
    def norm(self, x) -> float:
        ...

    @abstractmethod
    def dual_norm(self, f) -> float:
        """Norm of the functional ``y -> sum_i f_i y_i``."""

    @abstractmethod
    def norming_functional(self, x) -> np.ndarray:
        """Coordinates of f with dual_norm(f) = 1 and Re f(x) = norm(x).

        Ties are broken deterministically (lexicographically smallest extreme
        point of the nonnegative section of the dual face).
        """

    @abstractmethod
    def attaining_vector(self, f) -> np.ndarray:
        """A unit vector x with Re f(x) = dual_norm(f)."""

    @abstractmethod
    def _params(self) -> dict:
        ...

    # -- shared helpers ---------------------------------------------------

    def pairing(self, f, x):
        """The bilinear action ``sum_i f_i x_i`` (complex for complex spaces)."""
        fv = self.coerce(f)
        xv = self.coerce(x)
        out = np.dot(fv, xv)
        return complex(out) if self.scalar_field == "complex" else float(out)

    def unit(self, x) -> np.ndarray:
        arr = self.coerce(x)
        n = self.norm(arr)
        if n == 0.0:
            raise DegenerateInput("cannot normalize the zero vector")
        return arr / n

    def canonical_unit(self) -> np.ndarray:
        """The first canonical basis direction, normalized."""
        e = np.zeros(self.dim, dtype=self.dtype)
        e[0] = 1.0
        return e / self.norm(e)

    def sphere_check(self, x) -> None:
        n = self.norm(x)
        if abs(n - 1.0) > TOL_SPHERE:
            raise NotOnSphere(f"norm is {n}, not 1 within {TOL_SPHERE}")

    def to_json(self) -> dict:
        return {"kind": self.kind, "dim": self.dim, "params": self._params()}

    def __repr__(self) -> str:
        return f"<{type(self).__name__} dim={self.dim} field={self.scalar_field}>"


class EuclideanSpace(NormedSpace):
    """R^n or C^n with the Euclidean norm (the only complex-capable kind)."""

    kind = "euclidean"

    def __init__(self, dim: int, scalar_field: str = "real"):
        if dim < 1:
            raise DimensionError(f"dimension must be positive, got {dim}")
        if scalar_field not in ("real", "complex"):
            raise ConfigError(f"scalar_field must be 'real' or 'complex', got {scalar_field!r}")
        self.dim = int(dim)
        self.scalar_field = scalar_field

    def norm(self, x) -> float:
        return float(np.linalg.norm(self.coerce(x)))

    def dual_norm(self, f) -> float:
        return float(np.linalg.norm(self.coerce(f)))

    def norming_functional(self, x) -> np.ndarray:
        arr = self.coerce(x)
        n = float(np.linalg.norm(arr))
        if n == 0.0:
            raise DegenerateInput("the zero vector has no norming functional")
        return np.conj(arr) / n

    def attaining_vector(self, f) -> np.ndarray:
        fv = self.coerce(f)
        n = float(np.linalg.norm(fv))
        if n == 0.0:
            raise DegenerateInput("the zero functional attains nowhere on the sphere")
        return np.conj(fv) / n

    def inner(self, a, b):
        """Hermitian inner product <a, b> = sum_i a_i conj(b_i)."""
        av = self.coerce(a)
        bv = self.coerce(b)
        out = np.dot(av, np.conj(bv))
        return complex(out) if self.scalar_field == "complex" else float(out)

    def _params(self) -> dict:
        return {"field": self.scalar_field}


class LpSpace(NormedSpace):
    """R^n with the p-norm, 1 <= p <= inf (real only)."""

    kind = "lp"
    scalar_field = "real"

    def __init__(self, dim: int, p: float):
        self._lat = LpLattice(dim, p)
        self.dim = self._lat.dim
        self.p = self._lat.p

    def norm(self, x) -> float:
        return self._lat.norm_of(self.coerce(x))

    def dual_norm(self, f) -> float:
        return self._lat.dual_norm_of(self.coerce(f))

    def norming_functional(self, x) -> np.ndarray:
        return self._lat.norming_of(self.coerce(x))

    def attaining_vector(self, f) -> np.ndarray:
        fv = self.coerce(f)
        signs = np.where(fv < 0.0, -1.0, 1.0)
        return signs * self._lat.dual_attaining_vector(np.abs(fv))

    def _params(self) -> dict:
        return {"p": self.p if self.p != math.inf else "inf"}


class PlaneSpace(NormedSpace):
    """R^2 normed by a two-dimensional absolute generator (real only)."""

    kind = "absolute2"
    scalar_field = "real"
    dim = 2

    def __init__(self, generator: AbsoluteNorm2):
        self.generator = generator
        self._lat = Absolute2Lattice(generator)

    def norm(self, x) -> float:
        return self.generator.value(self.coerce(x))

    def dual_norm(self, f) -> float:
        return self.generator.dual_value(self.coerce(f))

    def norming_functional(self, x) -> np.ndarray:
        return self.generator.dual_pair(self.coerce(x))

    def attaining_vector(self, f) -> np.ndarray:
        fv = self.coerce(f)
        signs = np.where(fv < 0.0, -1.0, 1.0)
        return signs * self._lat.dual_attaining_vector(np.abs(fv))

    def _params(self) -> dict:
        return {"generator": self.generator.to_params()}


class LatticeSpace(NormedSpace):
    """R^n with a monotone 1-unconditional (lattice) norm (real only)."""

    kind = "lattice"
    scalar_field = "real"

    def __init__(self, lattice: FiniteLattice):
        self.lattice = lattice
        self.dim = lattice.dim

    def norm(self, x) -> float:
        return self.lattice.norm_of(self.coerce(x))

    def dual_norm(self, f) -> float:
        return self.lattice.dual_norm_of(self.coerce(f))

    def norming_functional(self, x) -> np.ndarray:
        return self.lattice.norming_of(self.coerce(x))

    def attaining_vector(self, f) -> np.ndarray:
        fv = self.coerce(f)
        signs = np.where(fv < 0.0, -1.0, 1.0)
        return signs * self.lattice.dual_attaining_vector(np.abs(fv))

    def _params(self) -> dict:
        return {"lattice": self.lattice.to_params()}


class DirectSumSpace(NormedSpace):
    """Blocks combined through a lattice norm of their block norms.

    ``norm((x_1, ..., x_m)) = combiner((norm(x_1), ..., norm(x_m)))``.
    Real only: the block-profile machinery is intrinsically real.
    """

    kind = "direct_sum"
    scalar_field = "real"

    def __init__(self, components: list[NormedSpace], combiner: FiniteLattice):
        if not components:
            raise ConfigError("a direct sum needs at least one component")
        if combiner.dim != len(components):
            raise DimensionError(
                f"combiner has dimension {combiner.dim} but there are "
                f"{len(components)} components")
        for comp in components:
            if comp.scalar_field != "real":
                raise ConfigError("direct sums support real components only")
        self.components = list(components)
        self.combiner = combiner
        self.offsets = np.cumsum([0] + [c.dim for c in components])
        self.dim = int(self.offsets[-1])

    # -- block plumbing ---------------------------------------------------

    def split(self, x) -> list[np.ndarray]:
        arr = self.coerce(x)
        return [arr[self.offsets[i]:self.offsets[i + 1]]
                for i in range(len(self.components))]

    def embed(self, blocks) -> np.ndarray:
        if len(blocks) != len(self.components):
            raise DimensionError(
                f"expected {len(self.components)} blocks, got {len(blocks)}")
        parts = [comp.coerce(b) for comp, b in zip(self.components, blocks)]
        return np.concatenate(parts)

    def profile(self, x) -> np.ndarray:
        """The tuple of block norms."""
        return np.array([comp.norm(b)
                         for comp, b in zip(self.components, self.split(x))])

    def dual_profile(self, f) -> np.ndarray:
        return np.array([comp.dual_norm(b)
                         for comp, b in zip(self.components, self.split(f))])

    # -- norms ------------------------------------------------------------

    def norm(self, x) -> float:
        return self.combiner.norm_of(self.profile(x))

    def dual_norm(self, f) -> float:
        return self.combiner.dual_norm_of(self.dual_profile(f))

    def norming_functional(self, x) -> np.ndarray:
        prof = self.profile(x)
        if self.combiner.norm_of(prof) == 0.0:
            raise DegenerateInput("the zero vector has no norming functional")
        estar = self.combiner.norming_of(prof)
        blocks = []
        for comp, b in zip(self.components, self.split(x)):
            if comp.norm(b) > 0.0:
                blocks.append(comp.norming_functional(b))
            else:
                blocks.append(comp.norming_functional(comp.canonical_unit()))
        return np.concatenate([e * blk for e, blk in zip(estar, blocks)])

    def attaining_vector(self, f) -> np.ndarray:
        dprof = self.dual_profile(f)
        if self.combiner.dual_norm_of(dprof) == 0.0:
            raise DegenerateInput("the zero functional attains nowhere on the sphere")
        u = self.combiner.dual_attaining_vector(dprof)
        blocks = []
        for comp, b in zip(self.components, self.split(f)):
            if comp.dual_norm(b) > 0.0:
                blocks.append(comp.attaining_vector(b))
            else:
                blocks.append(comp.canonical_unit())
        return np.concatenate([ui * blk for ui, blk in zip(u, blocks)])

    def _params(self) -> dict:
        return {"components": [c.to_json() for c in self.components],
                "combiner": self.combiner.to_params()}


# -- JSON round-trip -------------------------------------------------------


def space_from_json(obj: dict) -> NormedSpace:
    """Rebuild a space from ``{"kind": ..., "dim": ..., "params": {...}}``."""
    try:
        kind = obj["kind"]
        dim = int(obj["dim"])
        params = obj.get("params", {})
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed space description: {exc}") from exc
    if kind == "euclidean":
        return EuclideanSpace(dim, params.get("field", "real"))
    if params.get("field", "real") != "real":
        raise ConfigError(
            f"complex scalars are supported only for euclidean spaces, not {kind!r}")
    try:
        if kind == "lp":
            p = params["p"]
            return LpSpace(dim, math.inf if p == "inf" else float(p))
        if kind == "absolute2":
            if dim != 2:
                raise DimensionError("absolute2 spaces are two-dimensional")
            return PlaneSpace(AbsoluteNorm2.from_params(params["generator"]))
        if kind == "lattice":
            space = LatticeSpace(lattice_from_params(params["lattice"]))
            if space.dim != dim:
                raise DimensionError(
                    f"lattice dimension {space.dim} does not match declared {dim}")
            return space
        if kind == "direct_sum":
            comps = [space_from_json(c) for c in params["components"]]
            space = DirectSumSpace(comps,
                                   lattice_from_params(params["combiner"]))
            if space.dim != dim:
                raise DimensionError(
                    f"component dimensions sum to {space.dim}, not {dim}")
            return space
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(
            f"malformed parameters for space kind {kind!r}: {exc}") from exc
    raise ConfigError(f"unknown space kind {kind!r}")


def _scalar_to_json(v):
    if isinstance(v, complex) or isinstance(v, np.complexfloating):
        return [float(v.real), float(v.imag)]
    return float(v)


def _scalar_from_json(v):
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return float(v)


def vector_to_json(space: NormedSpace, coords) -> dict:
    arr = space.coerce(coords)
    return {"space": space.to_json(),
            "coords": [_scalar_to_json(v) for v in arr]}


def vector_from_json(obj: dict) -> tuple[NormedSpace, np.ndarray]:
    space = space_from_json(obj["space"])
    coords = np.array([_scalar_from_json(v) for v in obj["coords"]])
    return space, space.coerce(coords)


# -- operators --------------------------------------------------------------


@dataclass
class Operator:
    """A linear map stored as a dense matrix (codomain_dim x domain_dim)."""

    matrix: np.ndarray
    domain: NormedSpace
    codomain: NormedSpace

    def __post_init__(self):
        mat = np.asarray(self.matrix)
        if mat.ndim != 2:
            raise DimensionError(f"operator matrix must be 2-d, got {mat.ndim}-d")
        if mat.shape != (self.codomain.dim, self.domain.dim):
            raise DimensionError(
                f"matrix shape {mat.shape} does not match spaces "
                f"({self.codomain.dim} x {self.domain.dim})")
        dtype = (np.complex128 if "complex" in (self.domain.scalar_field,
                                                self.codomain.scalar_field)
                 else np.float64)
        self.matrix = mat.astype(dtype)

    def apply(self, x) -> np.ndarray:
        return self.matrix @ self.domain.coerce(x)

    def restrict_to_block(self, sum_space: DirectSumSpace, i: int) -> "Operator":
        """Restriction to the i-th block of a direct-sum domain."""
        lo, hi = sum_space.offsets[i], sum_space.offsets[i + 1]
        return Operator(self.matrix[:, lo:hi], sum_space.components[i],
                        self.codomain)

    def to_json(self) -> dict:
        return {"domain": self.domain.to_json(),
                "codomain": self.codomain.to_json(),
                "matrix": [[_scalar_to_json(v) for v in row]
                           for row in self.matrix]}

    @classmethod
    def from_json(cls, obj: dict) -> "Operator":
        dom = space_from_json(obj["domain"])
        cod = space_from_json(obj["codomain"])
        mat = np.array([[_scalar_from_json(v) for v in row]
                        for row in obj["matrix"]])
        return cls(mat, dom, cod)


@dataclass(frozen=True)
class OperatorNormResult:
    """Operator norm with provenance.

    ``value`` is exact when ``exact`` is True, otherwise a certified lower
    bound from ascent.  ``witness`` is a unit domain vector realizing
    ``value`` (up to the stated tolerance) and ``method`` names the path
    taken.
    """

    value: float
    exact: bool
    witness: np.ndarray
    method: str


def _ascent_operator_norm(op: Operator, starts: int = 8,
                          iterations: int = 60) -> OperatorNormResult:
    """Certified lower bound by duality-mapping ascent.

    Repeatedly replaces x by the domain vector attaining the functional
    ``g o T`` where g norms ``T x`` in the codomain; each step is monotone
    nondecreasing in ``|T x|``.
    """
    dom, cod = op.domain, op.codomain
    rng = np.random.default_rng(20240 + dom.dim * 131 + cod.dim)
    seeds: list[np.ndarray] = []
    for j in range(min(dom.dim, starts)):
        e = np.zeros(dom.dim)
        e[j] = 1.0
        seeds.append(e)
    while len(seeds) < starts:
        draw = rng.standard_normal(dom.dim)
        if dom.scalar_field == "complex":
            draw = draw + 1j * rng.standard_normal(dom.dim)
        seeds.append(draw)
    best_val = -1.0
    best_x = None
    for seed in seeds:
        if dom.norm(seed) == 0.0:
            continue
        x = dom.unit(seed)
        val = cod.norm(op.apply(x))
        for _ in range(iterations):
            y = op.apply(x)
            if cod.norm(y) == 0.0:
                break
            g = cod.norming_functional(y)
            phi = op.matrix.T @ g
            if dom.dual_norm(phi) == 0.0:
                break
            x_new = dom.attaining_vector(phi)
            new_val = cod.norm(op.apply(x_new))
            if new_val <= val * (1.0 + 1e-14):
                x, val = x_new, max(val, new_val)
                break
            x, val = x_new, new_val
        if val > best_val:
            best_val, best_x = val, x
    if best_x is None:
        best_x = dom.canonical_unit()
        best_val = cod.norm(op.apply(best_x))
    return OperatorNormResult(best_val, False, best_x, "ascent")


def operator_norm(op: Operator) -> OperatorNormResult:
    """Operator norm with exactness flag.

    Exact paths: one-dimensional domains; lp(1) domains (signed column
    maximum); euclidean-to-euclidean (largest singular value); direct sums
    with an l1-like combiner (maximum of block restriction norms, scaled by
    inverse weights).  Everything else falls back to multi-start ascent and
    is flagged nonexact.
    """
    dom, cod = op.domain, op.codomain
    if dom.dim == 1:
        x = dom.canonical_unit()
        return OperatorNormResult(cod.norm(op.apply(x)), True, x, "one_dim")
    if dom.kind == "lp" and dom.p == 1.0:
        vals = [cod.norm(op.matrix[:, j]) for j in range(dom.dim)]
        j = int(np.argmax(vals))
        e = np.zeros(dom.dim)
        e[j] = 1.0
        return OperatorNormResult(float(vals[j]), True, e, "l1_columns")
    if dom.kind == "euclidean" and cod.kind == "euclidean":
        u, s, vh = np.linalg.svd(op.matrix)
        witness = np.conj(vh[0])
        return OperatorNormResult(float(s[0]), True, dom.coerce(witness), "svd")
    if dom.kind == "direct_sum":
        comb = dom.combiner
        weights = None
        if isinstance(comb, LpLattice) and comb.p == 1.0:
            weights = np.ones(comb.dim)
        elif isinstance(comb, WeightedL1Lattice):
            weights = comb.weights
        if weights is not None:
            # Ball = convex hull of scaled block balls, so the norm is the
            # maximum of block restriction norms over inverse weights.
            best = None
            for i in range(len(dom.components)):
                sub = operator_norm(op.restrict_to_block(dom, i))
                scaled = sub.value / weights[i]
                if best is None or scaled > best[0]:
                    best = (scaled, i, sub)
            scaled, i, sub = best
            blocks = [np.zeros(c.dim) for c in dom.components]
            blocks[i] = sub.witness / weights[i]
            witness = dom.embed(blocks)
            return OperatorNormResult(float(scaled), sub.exact, witness,
                                      "l1_sum_blocks")
    return _ascent_operator_norm(op)
