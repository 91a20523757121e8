"""Finite sequence lattices: R^n with an absolute (1-unconditional) norm.

These serve two roles: as coordinate spaces in their own right, and as the
*combiner* of a direct sum, where the norm of a tuple of blocks is the lattice
norm of the tuple of block norms.  Everything here is exact: duals, supporting
functionals, and dual-attaining vectors come from closed forms or vertex
enumeration, never from iterative optimization.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np

from .absolute import AbsoluteNorm2, _p_value, dual_exponent
from .errors import DegenerateInput, DimensionError, RangeError


class FiniteLattice(ABC):
    """A norm on R^n with ``norm(x) = norm(|x|)``, monotone on the cone."""

    dim: int

    def _coerce(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=float).reshape(-1)
        if arr.size != self.dim:
            raise DimensionError(
                f"expected a vector of length {self.dim}, got {arr.size}")
        return arr

    @abstractmethod
    def norm_of(self, x) -> float:
        ...

    @abstractmethod
    def dual_norm_of(self, c) -> float:
        """Norm of the functional x -> sum_i c_i x_i."""

    @abstractmethod
    def norming_of(self, x) -> np.ndarray:
        """A functional of dual norm one with <c, x> = norm(x).

        Deterministic: when the supporting functional is not unique, the
        lexicographically smallest extreme point of the nonnegative section
        of the dual face wins (free coordinates are never driven negative).
        Nonnegative whenever ``x`` is nonnegative.
        """

    @abstractmethod
    def dual_attaining_vector(self, c) -> np.ndarray:
        """A nonnegative unit vector u with <|c|, u> = dual_norm(c)."""

    @abstractmethod
    def to_params(self) -> dict:
        ...

    def unit(self, x) -> np.ndarray:
        arr = self._coerce(x)
        n = self.norm_of(arr)
        if n == 0.0:
            raise DegenerateInput("cannot normalize the zero vector")
        return arr / n


class LpLattice(FiniteLattice):
    """R^n with the p-norm, 1 <= p <= inf."""

    def __init__(self, dim: int, p: float):
        if dim < 1:
            raise DimensionError(f"dimension must be positive, got {dim}")
        if not p >= 1.0:
            raise RangeError(f"exponent must satisfy p >= 1, got {p}")
        self.dim = int(dim)
        self.p = float(p)

    def norm_of(self, x) -> float:
        arr = np.abs(self._coerce(x))
        if self.p == math.inf:
            return float(arr.max())
        if self.p == 1.0:
            return float(arr.sum())
        m = float(arr.max())
        if m == 0.0:
            return 0.0
        return m * float(((arr / m) ** self.p).sum()) ** (1.0 / self.p)

    def dual_norm_of(self, c) -> float:
        return LpLattice(self.dim, dual_exponent(self.p)).norm_of(c)

    def norming_of(self, x) -> np.ndarray:
        arr = self._coerce(x)
        n = self.norm_of(arr)
        if n == 0.0:
            raise DegenerateInput("the zero vector has no supporting functional")
        signs = np.where(arr >= 0.0, 1.0, -1.0)
        if self.p == 1.0:
            # Signs on the support; free coordinates stay at zero.
            return np.where(arr != 0.0, signs, 0.0)
        if self.p == math.inf:
            mags = np.abs(arr)
            ties = np.nonzero(mags == mags.max())[0]
            neg = [j for j in ties if arr[j] < 0.0]
            j = neg[0] if neg else int(ties[-1])
            out = np.zeros(self.dim)
            out[j] = signs[j]
            return out
        return signs * (np.abs(arr) / n) ** (self.p - 1.0)

    def dual_attaining_vector(self, c) -> np.ndarray:
        arr = np.abs(self._coerce(c))
        dn = self.dual_norm_of(arr)
        if dn == 0.0:
            raise DegenerateInput("the zero functional attains nowhere on the sphere")
        if self.p == 1.0:
            j = int(np.argmax(arr))
            out = np.zeros(self.dim)
            out[j] = 1.0
            return out
        if self.p == math.inf:
            return np.ones(self.dim)
        q = dual_exponent(self.p)
        u = (arr / dn) ** (q - 1.0)
        return u / self.norm_of(u)

    def to_params(self) -> dict:
        return {"kind": "lp", "dim": self.dim,
                "p": self.p if self.p != math.inf else "inf"}

    def __repr__(self) -> str:
        return f"LpLattice({self.dim}, {self.p})"


class WeightedL1Lattice(FiniteLattice):
    """R^n with norm sum_i w_i |x_i| for fixed weights w_i > 0.

    The functional with coefficients w supports the entire nonnegative
    sphere, which makes supporting functionals independent of the vector —
    the extreme case of a lattice with a flat nonnegative face.
    """

    def __init__(self, weights):
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.size < 1:
            raise DimensionError("need at least one weight")
        if not np.all(w > 0.0):
            raise RangeError("all weights must be strictly positive")
        self.dim = int(w.size)
        self.weights = w

    def norm_of(self, x) -> float:
        return float(self.weights @ np.abs(self._coerce(x)))

    def dual_norm_of(self, c) -> float:
        return float(np.max(np.abs(self._coerce(c)) / self.weights))

    def norming_of(self, x) -> np.ndarray:
        arr = self._coerce(x)
        if self.norm_of(arr) == 0.0:
            raise DegenerateInput("the zero vector has no supporting functional")
        signs = np.where(arr > 0.0, 1.0, np.where(arr < 0.0, -1.0, 0.0))
        return signs * self.weights

    def dual_attaining_vector(self, c) -> np.ndarray:
        arr = np.abs(self._coerce(c))
        if np.all(arr == 0.0):
            raise DegenerateInput("the zero functional attains nowhere on the sphere")
        j = int(np.argmax(arr / self.weights))
        out = np.zeros(self.dim)
        out[j] = 1.0 / self.weights[j]
        return out

    def to_params(self) -> dict:
        return {"kind": "weighted_l1", "weights": self.weights.tolist()}

    def __repr__(self) -> str:
        return f"WeightedL1Lattice({self.weights.tolist()})"


class Absolute2Lattice(FiniteLattice):
    """The two-dimensional lattice carried by an absolute normalized norm."""

    def __init__(self, norm: AbsoluteNorm2):
        self.dim = 2
        self.norm2 = norm

    def norm_of(self, x) -> float:
        return self.norm2.value(self._coerce(x))

    def dual_norm_of(self, c) -> float:
        return self.norm2.dual_value(self._coerce(c))

    def norming_of(self, x) -> np.ndarray:
        return self.norm2.dual_pair(self._coerce(x))

    def dual_attaining_vector(self, c) -> np.ndarray:
        arr = np.abs(self._coerce(c))
        dn = self.dual_norm_of(arr)
        if dn == 0.0:
            raise DegenerateInput("the zero functional attains nowhere on the sphere")
        if self.norm2.is_polyhedral:
            verts = self.norm2._vertices
            vals = [arr[0] * vx + arr[1] * vy for vx, vy in verts]
            j = int(np.argmax(vals))
            return np.array(verts[j])
        # Smooth p-norm: dual attainment by the conjugate-exponent power map.
        p = self.norm2.p
        q = dual_exponent(p)
        u = (arr / dn) ** (q - 1.0)
        return u / _p_value(u[0], u[1], p)

    def to_params(self) -> dict:
        return {"kind": "absolute2", "generator": self.norm2.to_params()}

    def __repr__(self) -> str:
        return f"Absolute2Lattice({self.norm2!r})"


def lattice_from_params(params: dict) -> FiniteLattice:
    kind = params.get("kind")
    if kind == "lp":
        p = params["p"]
        return LpLattice(int(params["dim"]), math.inf if p == "inf" else float(p))
    if kind == "weighted_l1":
        return WeightedL1Lattice(params["weights"])
    if kind == "absolute2":
        return Absolute2Lattice(AbsoluteNorm2.from_params(params["generator"]))
    raise RangeError(f"unknown lattice kind {kind!r}")
