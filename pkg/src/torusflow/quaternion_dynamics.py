"""
Quaternion algebra and imaginary-axis crossings of 4x4 linearizations.

A quaternion ``q0 + q1 i + q2 j + q3 k`` acts on the coordinate vector
``(q0, q1, q2, q3)``; left or right multiplication by a fixed quaternion is
a real 4x4 matrix.  Bifurcation scans track the largest real part of the
spectrum of a one-parameter operator family and bisect its sign changes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "BifurcationScan",
    "Crossing",
    "OperatorKind",
    "Quaternion",
    "QuatLinearOperator",
    "builtin_family",
    "find_crossing",
    "hamilton_product",
    "left_mult_matrix",
    "left_mult_operator",
    "linearize_about",
    "max_real_part",
    "right_mult_matrix",
    "right_mult_operator",
    "scan_max_real_part",
    "spectrum",
]


def hamilton_product(p: NDArray, q: NDArray) -> NDArray:
    """Vectorised Hamilton product over the last axis (length 4)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    p0, p1, p2, p3 = np.moveaxis(p, -1, 0)
    q0, q1, q2, q3 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3,
            p0 * q1 + p1 * q0 + p2 * q3 - p3 * q2,
            p0 * q2 - p1 * q3 + p2 * q0 + p3 * q1,
            p0 * q3 + p1 * q2 - p2 * q1 + p3 * q0,
        ],
        axis=-1,
    )


@dataclass(frozen=True)
class Quaternion:
    q0: float = 0.0
    q1: float = 0.0
    q2: float = 0.0
    q3: float = 0.0

    def __post_init__(self):
        for name in ("q0", "q1", "q2", "q3"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"quaternion component {name} must be finite")
            object.__setattr__(self, name, v)

    @classmethod
    def from_array(cls, a) -> Quaternion:
        return cls(*np.asarray(a, dtype=float).reshape(4))

    def as_array(self) -> NDArray:
        return np.array([self.q0, self.q1, self.q2, self.q3])

    @property
    def scalar(self) -> float:
        return self.q0

    @property
    def vector(self) -> NDArray:
        return np.array([self.q1, self.q2, self.q3])

    def norm(self) -> float:
        return math.sqrt(self.q0**2 + self.q1**2 + self.q2**2 + self.q3**2)

    def conjugate(self) -> Quaternion:
        return Quaternion(self.q0, -self.q1, -self.q2, -self.q3)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion.from_array(hamilton_product(self.as_array(), other.as_array()))
        return Quaternion.from_array(float(other) * self.as_array())

    def __rmul__(self, other):
        return Quaternion.from_array(float(other) * self.as_array())

    def __add__(self, other: Quaternion) -> Quaternion:
        return Quaternion.from_array(self.as_array() + other.as_array())

    def __neg__(self) -> Quaternion:
        return Quaternion.from_array(-self.as_array())


ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def left_mult_matrix(a: Quaternion) -> NDArray:
    a0, a1, a2, a3 = a.as_array()
    return np.array(
        [
            [a0, -a1, -a2, -a3],
            [a1, a0, -a3, a2],
            [a2, a3, a0, -a1],
            [a3, -a2, a1, a0],
        ]
    )


def right_mult_matrix(a: Quaternion) -> NDArray:
    a0, a1, a2, a3 = a.as_array()
    return np.array(
        [
            [a0, -a1, -a2, -a3],
            [a1, a0, a3, -a2],
            [a2, -a3, a0, a1],
            [a3, a2, -a1, a0],
        ]
    )


class OperatorKind(enum.Enum):
    LEFT_MULT = "left_mult"
    RIGHT_MULT = "right_mult"
    GENERAL = "general"


@dataclass(frozen=True)
class QuatLinearOperator:
    matrix: NDArray = field(repr=False)
    kind: OperatorKind = OperatorKind.GENERAL
    generator: Quaternion | None = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"operator matrix must be 4x4, got {m.shape}")
        kind = OperatorKind(self.kind)
        if kind is not OperatorKind.GENERAL:
            if self.generator is None:
                raise ValueError(f"{kind.value} operator needs its generating quaternion")
            build = left_mult_matrix if kind is OperatorKind.LEFT_MULT else right_mult_matrix
            if not np.array_equal(m, build(self.generator)):
                raise ValueError(f"matrix does not match {kind.value} by {self.generator}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "kind", kind)

    def __call__(self, q: Quaternion) -> Quaternion:
        return Quaternion.from_array(self.matrix @ q.as_array())

    def scaled(self, c: float) -> QuatLinearOperator:
        if self.kind is OperatorKind.GENERAL:
            return QuatLinearOperator(c * self.matrix)
        return QuatLinearOperator(c * self.matrix, self.kind, c * self.generator)

    @classmethod
    def general(cls, matrix) -> QuatLinearOperator:
        return cls(matrix)


def left_mult_operator(a: Quaternion) -> QuatLinearOperator:
    return QuatLinearOperator(left_mult_matrix(a), OperatorKind.LEFT_MULT, a)


def right_mult_operator(a: Quaternion) -> QuatLinearOperator:
    return QuatLinearOperator(right_mult_matrix(a), OperatorKind.RIGHT_MULT, a)


def _sort(eigs: NDArray) -> NDArray:
    eigs = np.asarray(eigs, dtype=complex)
    order = np.lexsort((eigs.imag, eigs.real))
    return eigs[order]


def spectrum(op: QuatLinearOperator) -> NDArray:
    """Eigenvalues (with multiplicity) sorted by real then imaginary part.

    Multiplication operators split into two invariant 2x2 blocks with
    eigenvalues ``a0 +- |v| i``; those are returned in closed form.  General
    matrices go through LAPACK.
    """
    if not np.all(np.isfinite(op.matrix)):
        raise np.linalg.LinAlgError("operator matrix has non-finite entries")
    if op.kind is not OperatorKind.GENERAL:
        a = op.generator
        r = float(np.linalg.norm(a.vector))
        lam = complex(a.q0, r)
        return _sort(np.array([lam, lam, lam.conjugate(), lam.conjugate()]))
    eigs = np.linalg.eigvals(op.matrix)
    if not np.all(np.isfinite(eigs)):
        raise np.linalg.LinAlgError("eigenvalue iteration produced non-finite values")
    return _sort(eigs)


def max_real_part(op: QuatLinearOperator) -> float:
    return float(np.max(spectrum(op).real))


def linearize_about(q_base: Quaternion, model: str = "left") -> QuatLinearOperator:
    """Linear operator for perturbations about ``q_base``.

    ``model`` picks left or right multiplication by the base state; the
    sign is negated so a positive scalar part damps perturbations.
    """
    neg = -q_base
    if model in ("left", "LeftMultByBase"):
        return left_mult_operator(neg)
    if model in ("right", "RightMultByBase"):
        return right_mult_operator(neg)
    raise ValueError(f"unknown perturbation model {model!r}")


@dataclass(frozen=True)
class BifurcationScan:
    parameter_name: str
    family: Callable[[float], QuatLinearOperator] = field(repr=False)
    mu_lo: float
    mu_hi: float
    samples: int = 101

    def __post_init__(self):
        if not self.mu_lo < self.mu_hi:
            raise ValueError(f"need mu_lo < mu_hi, got [{self.mu_lo}, {self.mu_hi}]")
        if self.samples < 2:
            raise ValueError(f"need at least 2 samples, got {self.samples}")

    def grid(self) -> NDArray:
        return np.linspace(self.mu_lo, self.mu_hi, self.samples)


@dataclass(frozen=True)
class Crossing:
    mu_star: float
    imag_at_crossing: float
    bracket: tuple[float, float]
    max_real_part: float

    def as_dict(self) -> dict:
        return {
            "mu_star": self.mu_star,
            "imag_at_crossing": self.imag_at_crossing,
            "bracket": list(self.bracket),
            "max_real_part": self.max_real_part,
        }


def scan_max_real_part(scan: BifurcationScan) -> tuple[NDArray, NDArray]:
    mus = scan.grid()
    vals = np.array([max_real_part(scan.family(float(m))) for m in mus])
    return mus, vals


def _crossing_frequency(op: QuatLinearOperator) -> float:
    eigs = spectrum(op)
    top = eigs[np.isclose(eigs.real, eigs.real.max(), rtol=0.0, atol=1e-9)]
    return float(np.max(np.abs(top.imag)))


def find_crossing(scan: BifurcationScan, tol: float) -> list[Crossing]:
    """Locate sign changes of the maximal real part and bisect each.

    Returns one record per bracket, empty when the sign never changes.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")

    def g(mu: float) -> float:
        v = max_real_part(scan.family(mu))
        if not math.isfinite(v):
            raise np.linalg.LinAlgError(f"non-finite spectrum at {scan.parameter_name}={mu}")
        return v

    mus, vals = scan_max_real_part(scan)
    if not np.all(np.isfinite(vals)):
        raise np.linalg.LinAlgError("non-finite spectrum in scan")
    out = []
    last = len(mus) - 2
    for i in range(len(mus) - 1):
        a, b = float(mus[i]), float(mus[i + 1])
        ga, gb = float(vals[i]), float(vals[i + 1])
        if ga == 0.0:
            lo = hi = a
        elif gb == 0.0 and i == last:
            lo = hi = b
        elif ga * gb < 0.0:
            lo, hi = a, b
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                gm = g(mid)
                if gm == 0.0:
                    lo = hi = mid
                elif (gm > 0.0) == (ga > 0.0):
                    lo, ga = mid, gm
                else:
                    hi = mid
        else:
            continue
        mu_star = 0.5 * (lo + hi)
        op = scan.family(mu_star)
        out.append(Crossing(mu_star, _crossing_frequency(op), (lo, hi), max_real_part(op)))
    return out


def _rotation_block(omega: float, mu: float) -> NDArray:
    m = np.zeros((4, 4))
    m[0, 1], m[1, 0] = -omega, omega
    m[2, 3], m[3, 2] = -omega, omega
    return m + mu * np.eye(4)


BUILTIN_FAMILIES: dict[str, tuple[str, Callable[[float], QuatLinearOperator]]] = {
    "leftmult-shift": (
        "left multiplication by mu + i; crosses at mu = 0 with frequency 1",
        lambda mu: left_mult_operator(Quaternion(mu, 1.0)),
    ),
    "leftmult-constant": (
        "left multiplication by 1 + mu i; real part fixed at 1",
        lambda mu: left_mult_operator(Quaternion(1.0, mu)),
    ),
    "rotation-shift": (
        "rotation blocks of rate 2 plus mu times the identity",
        lambda mu: QuatLinearOperator(_rotation_block(2.0, mu)),
    ),
    "linearized-base": (
        "negated left multiplication by the base state -mu + 3j",
        lambda mu: linearize_about(Quaternion(-mu, 0.0, 3.0), "left"),
    ),
}


def builtin_family(name: str) -> Callable[[float], QuatLinearOperator]:
    if name not in BUILTIN_FAMILIES:
        raise KeyError(f"unknown family {name!r}; choose from {sorted(BUILTIN_FAMILIES)}")
    return BUILTIN_FAMILIES[name][1]
