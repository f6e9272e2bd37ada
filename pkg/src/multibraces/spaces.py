"""Finite bigraded vector spaces over the rationals.

All arithmetic is exact: scalars are ``fractions.Fraction``, which keeps
numerator/denominator in lowest terms with a positive denominator.  Every
structure here is immutable after construction, so values can be shared
freely between computations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

Scalar = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)
MINUS_ONE = Fraction(-1)


def parse_scalar(text: str) -> Scalar:
    """Parse a rational written as ``p`` or ``p/q``."""
    return Fraction(text.strip())


def render_scalar(value: Scalar) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class BiDegree:
    """Super degree together with the d-degree (arity minus one).

    Plain vectors carry d = -1; an n-linear map carries d = n - 1.
    """

    super: int
    d: int

    def __post_init__(self):
        if self.d < -1:
            raise ValueError(f"d-degree must be >= -1, got {self.d}")


def exchange_sign(x: BiDegree, y: BiDegree) -> Scalar:
    """Sign picked up when the symbols x and y trade places.

    The exponent is |x||y| + d(x)d(y); the result is +1 or -1.
    """
    exponent = x.super * y.super + x.d * y.d
    return ONE if exponent % 2 == 0 else MINUS_ONE


class GradedSpace:
    """A finite-dimensional space with a named basis and integer gradings.

    Each basis element has a super degree, an optional weight (default 0)
    and a d-degree used in exchange signs.  For an ordinary vector space
    the d-degree of every basis element is -1; spaces whose elements are
    themselves multilinear maps (e.g. a truncated Hochschild space) carry
    the element's arity minus one instead.
    """

    def __init__(self, basis, super_degrees, weights=None, d_degrees=None):
        self.basis = tuple(basis)
        if len(set(self.basis)) != len(self.basis):
            raise ValueError("basis names must be unique")
        self.super_degrees = dict(zip(self.basis, super_degrees, strict=True))
        if weights is None:
            self.weights = {name: 0 for name in self.basis}
        else:
            self.weights = dict(zip(self.basis, weights, strict=True))
        if d_degrees is None:
            self.d_degrees = {name: -1 for name in self.basis}
        else:
            self.d_degrees = dict(zip(self.basis, d_degrees, strict=True))
        self._index = {name: i for i, name in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, name: str) -> int:
        return self._index[name]

    def super_degree(self, name: str) -> int:
        return self.super_degrees[name]

    def weight(self, name: str) -> int:
        return self.weights[name]

    def bidegree(self, name: str) -> BiDegree:
        return BiDegree(self.super_degrees[name], self.d_degrees[name])

    def unit_vector(self, name: str) -> "Vector":
        if name not in self._index:
            raise KeyError(f"unknown basis element {name!r}")
        return Vector(self, {name: ONE})

    def zero_vector(self) -> "Vector":
        return Vector(self, {})

    def vectors(self) -> list["Vector"]:
        return [self.unit_vector(name) for name in self.basis]

    def basis_by_super(self) -> dict:
        out: dict = {}
        for name in self.basis:
            out.setdefault(self.super_degrees[name], []).append(name)
        return out

    def __repr__(self):
        return f"GradedSpace({list(self.basis)!r})"


class Vector:
    """A finite rational combination of basis elements.

    Zero coefficients are never stored.  Iteration order follows the
    basis declaration order, so printed expansions are reproducible.
    """

    __slots__ = ("space", "coeffs")

    def __init__(self, space: GradedSpace, coeffs: Mapping[str, Scalar]):
        self.space = space
        self.coeffs = {k: v for k, v in coeffs.items() if v != 0}

    def items(self):
        order = self.space._index
        return sorted(self.coeffs.items(), key=lambda kv: order[kv[0]])

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_homogeneous(self) -> bool:
        degs = {self.space.super_degrees[k] for k in self.coeffs}
        return len(degs) <= 1

    def super_degree(self):
        """Super degree of a homogeneous vector, None for 0 or mixed."""
        degs = {self.space.super_degrees[k] for k in self.coeffs}
        if len(degs) == 1:
            return degs.pop()
        return None

    def __add__(self, other: "Vector") -> "Vector":
        if other.space is not self.space:
            raise ValueError("vectors live in different spaces")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, ZERO) + v
        return Vector(self.space, out)

    def __sub__(self, other: "Vector") -> "Vector":
        return self + (-other)

    def __neg__(self) -> "Vector":
        return Vector(self.space, {k: -v for k, v in self.coeffs.items()})

    def scale(self, c: Scalar) -> "Vector":
        if c == 0:
            return Vector(self.space, {})
        return Vector(self.space, {k: c * v for k, v in self.coeffs.items()})

    def __eq__(self, other):
        return isinstance(other, Vector) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for name, c in self.items():
            if c == 1:
                parts.append(name)
            else:
                parts.append(f"{render_scalar(c)}*{name}")
        return " + ".join(parts)


def linear_combination(space: GradedSpace, terms: Iterable[tuple[Scalar, Vector]]) -> Vector:
    out: dict[str, Scalar] = {}
    for c, vec in terms:
        if c == 0:
            continue
        for k, v in vec.coeffs.items():
            out[k] = out.get(k, ZERO) + c * v
    return Vector(space, out)
