"""Numerical certificates.

A certificate records one checked inequality (or equality) with its operands,
tolerance, and signed margin.  Verifiers return lists of certificates rather
than booleans so failures keep enough context to debug; ``ensure`` converts a
failed list into an exception for pipelines that must not continue.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InternalInvariantError

_RELATIONS = ("<=", ">=", "==", "<", ">")


@dataclass(frozen=True)
class Certificate:
    """One checked relation ``lhs <rel> rhs`` up to ``tol``.

    ``margin`` is how far inside the constraint the operands sit (positive =
    satisfied with room, negative = violated beyond tolerance is ``passed`` =
    False).  For ``==`` the margin is ``tol - |lhs - rhs|``.
    """

    name: str
    lhs: float
    relation: str
    rhs: float
    tol: float
    margin: float
    passed: bool

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.name}: {self.lhs:.12g} {self.relation} "
            f"{self.rhs:.12g} (tol={self.tol:.3g}, margin={self.margin:.3g})"
        )


def check(name: str, lhs: float, relation: str, rhs: float, tol: float = 0.0) -> Certificate:
    """Build a certificate for ``lhs <relation> rhs`` within tolerance ``tol``.

    Strict relations treat ``tol`` as the required gap; non-strict relations
    allow violation up to ``tol``.
    """
    if relation not in _RELATIONS:
        raise ValueError(f"unknown relation {relation!r}")
    lhs = float(lhs)
    rhs = float(rhs)
    tol = float(tol)
    if relation == "<=":
        margin = rhs + tol - lhs
    elif relation == ">=":
        margin = lhs + tol - rhs
    elif relation == "==":
        margin = tol - abs(lhs - rhs)
    elif relation == "<":
        margin = rhs - tol - lhs
    else:  # ">"
        margin = lhs - tol - rhs
    return Certificate(
        name=name,
        lhs=lhs,
        relation=relation,
        rhs=rhs,
        tol=tol,
        margin=margin,
        passed=bool(margin >= 0.0),
    )


def all_passed(certs: list[Certificate]) -> bool:
    return all(c.passed for c in certs)


def ensure(certs: list[Certificate]) -> list[Certificate]:
    """Raise ``InternalInvariantError`` listing every failed certificate."""
    failed = [c for c in certs if not c.passed]
    if failed:
        lines = "\n".join(str(c) for c in failed)
        raise InternalInvariantError(f"{len(failed)} certificate(s) failed:\n{lines}")
    return certs


def summarize(certs: list[Certificate]) -> str:
    """One line per certificate, then a pass/fail tally."""
    lines = [str(c) for c in certs]
    n_pass = sum(c.passed for c in certs)
    lines.append(f"{n_pass}/{len(certs)} certificates passed")
    return "\n".join(lines)
