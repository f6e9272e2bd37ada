"""Concrete partitioned multilinear maps on a finite bigraded space.

A map of type (j1|...|js) eats one tuple of vectors per slot.  Tables are
sparse over basis tuples and may be backed by a rule that fills entries on
demand; missing entries mean zero.  The identity selector (type (1|0)) and
the zero map (type (0|1)) are distinguished kinds because their placement
behaviour inside braces is positional rather than tabular.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .partitions import IDENTITY_TYPE, Partition, ZERO_TYPE
from .spaces import GradedSpace, Vector

TABLE = "table"
IDENTITY_SELECTOR = "identity-selector"
ZERO_MAP = "zero"

BasisTuple = tuple[tuple[str, ...], ...]


class MapError(ValueError):
    pass


class PartitionedMap:
    """A multilinear map of a fixed partition type and super degree."""

    def __init__(
        self,
        space: GradedSpace,
        ptype: Partition,
        super_degree: int,
        table: Mapping[BasisTuple, Vector] | None = None,
        kind: str = TABLE,
        rule: Callable[[BasisTuple], Vector] | None = None,
        name: str | None = None,
        overflow: set[BasisTuple] | None = None,
    ):
        self.space = space
        self.ptype = ptype
        self.super_degree = super_degree
        self.kind = kind
        self.name = name
        self.overflow = overflow if overflow is not None else set()
        if kind == IDENTITY_SELECTOR and ptype != IDENTITY_TYPE:
            raise MapError("the identity selector has type (1|0)")
        if kind == ZERO_MAP and ptype != ZERO_TYPE:
            raise MapError("the zero map has type (0|1)")
        self._rule = rule
        self._table: dict[BasisTuple, Vector] = {}
        if table:
            for key, value in table.items():
                key = tuple(tuple(part) for part in key)
                self._check_key(key)
                if not value.is_zero():
                    self._check_homogeneous(key, value)
                    self._table[key] = value

    def _check_key(self, key: BasisTuple):
        if len(key) != self.ptype.n_slots or any(
            len(part) != size for part, size in zip(key, self.ptype.slots)
        ):
            raise MapError(f"basis tuple {key} does not match type {self.ptype}")
        for part in key:
            for name in part:
                if name not in self.space._index:
                    raise MapError(f"unknown basis element {name!r}")

    def _check_homogeneous(self, key: BasisTuple, value: Vector):
        expected = self.super_degree + sum(
            self.space.super_degree(n) for part in key for n in part
        )
        for out_name in value.coeffs:
            if self.space.super_degree(out_name) != expected:
                raise MapError(
                    f"entry {key} -> {value} breaks homogeneity of degree "
                    f"{self.super_degree}"
                )

    @property
    def d(self) -> int:
        return self.ptype.d

    def entry(self, key: BasisTuple) -> Vector:
        """Value on a tuple of basis elements, grouped per slot."""
        key = tuple(tuple(part) for part in key)
        if self.kind == ZERO_MAP:
            return self.space.zero_vector()
        if self.kind == IDENTITY_SELECTOR:
            return self.space.unit_vector(key[0][0])
        if key in self._table:
            return self._table[key]
        if self._rule is not None:
            self._check_key(key)
            value = self._rule(key)
            self._check_homogeneous(key, value)
            self._table[key] = value
            return value
        return self.space.zero_vector()

    def evaluate(self, args: Sequence[Sequence[Vector]]) -> Vector:
        """Multilinear extension of the basis table to arbitrary vectors."""
        if len(args) != self.ptype.n_slots or any(
            len(part) != size for part, size in zip(args, self.ptype.slots)
        ):
            raise MapError(
                f"arguments {[len(a) for a in args]} do not match type {self.ptype}"
            )
        flat = [v for part in args for v in part]
        total = self.space.zero_vector()
        for combo in itertools.product(*(v.items() for v in flat)):
            coeff = Fraction(1)
            names = []
            for name, c in combo:
                coeff *= c
                names.append(name)
            key: list[tuple[str, ...]] = []
            k = 0
            for size in self.ptype.slots:
                key.append(tuple(names[k : k + size]))
                k += size
            total = total + self.entry(tuple(key)).scale(coeff)
        return total

    def basis_keys(self) -> Iterable[BasisTuple]:
        pools = [
            itertools.product(self.space.basis, repeat=size)
            for size in self.ptype.slots
        ]
        return itertools.product(*pools)

    def is_zero(self) -> bool:
        if self.kind == ZERO_MAP:
            return True
        if self.kind == IDENTITY_SELECTOR:
            return False
        if self._rule is None:
            return all(v.is_zero() for v in self._table.values())
        return all(self.entry(k).is_zero() for k in self.basis_keys())

    def support(self) -> list[BasisTuple]:
        if self._rule is not None:
            for key in self.basis_keys():
                self.entry(key)
        return [k for k, v in self._table.items() if not v.is_zero()]

    def __add__(self, other: "PartitionedMap") -> "PartitionedMap":
        if other.ptype != self.ptype or other.space is not self.space:
            raise MapError("can only add maps of the same type on the same space")
        if other.super_degree != self.super_degree:
            raise MapError("can only add maps of equal super degree")
        return PartitionedMap(
            self.space,
            self.ptype,
            self.super_degree,
            rule=lambda key: self.entry(key) + other.entry(key),
            overflow=self.overflow | other.overflow,
        )

    def scale(self, c: Fraction) -> "PartitionedMap":
        return PartitionedMap(
            self.space,
            self.ptype,
            self.super_degree,
            rule=lambda key: self.entry(key).scale(c),
            overflow=set(self.overflow),
        )

    def __sub__(self, other: "PartitionedMap") -> "PartitionedMap":
        return self + other.scale(Fraction(-1))

    def equal_on_basis(self, other: "PartitionedMap") -> bool:
        return all(self.entry(k) == other.entry(k) for k in self.basis_keys())

    def first_nonzero(self):
        for key in self.basis_keys():
            value = self.entry(key)
            if not value.is_zero():
                return key, value
        return None

    def __repr__(self):
        label = self.name or self.kind
        return f"PartitionedMap({label}, type {self.ptype}, deg {self.super_degree})"


def table_map(space, ptype, super_degree, table, name=None) -> PartitionedMap:
    return PartitionedMap(space, Partition(ptype), super_degree, table=table, name=name)


def identity_selector(space) -> PartitionedMap:
    return PartitionedMap(space, IDENTITY_TYPE, 0, kind=IDENTITY_SELECTOR, name="id-selector")


def zero_map(space) -> PartitionedMap:
    return PartitionedMap(space, ZERO_TYPE, 0, kind=ZERO_MAP, name="zero")


def antisymmetrize(m: PartitionedMap) -> PartitionedMap:
    """Signed sum over all argument permutations of a plain map.

    Each transposition contributes the exchange sign of the crossed
    arguments, so even permutations of odd vectors still pick up signs.
    """
    if not m.ptype.is_plain():
        raise MapError("antisymmetrization is defined for plain maps only")
    n = m.ptype.n_args
    space = m.space
    perms = list(itertools.permutations(range(n)))

    def rule(key: BasisTuple) -> Vector:
        names = key[0]
        degs = [space.bidegree(x) for x in names]
        total = space.zero_vector()
        for perm in perms:
            sign = 1
            exponent = 0
            for i, j in itertools.combinations(range(n), 2):
                if perm.index(i) > perm.index(j):
                    exponent += degs[i].super * degs[j].super + degs[i].d * degs[j].d
            sign = Fraction(-1) ** (exponent % 2)
            permuted = tuple(names[p] for p in perm)
            total = total + m.entry((permuted,)).scale(sign)
        return total

    return PartitionedMap(space, m.ptype, m.super_degree, rule=rule, name=f"asym({m.name})")


class MegaMap:
    """A finite formal sum of partitioned maps, one per partition."""

    def __init__(self, components: Iterable[PartitionedMap]):
        self.components: dict[Partition, PartitionedMap] = {}
        space = None
        for comp in components:
            if comp.ptype in self.components:
                raise MapError(f"two components of type {comp.ptype}")
            if space is None:
                space = comp.space
            elif comp.space is not space:
                raise MapError("all components must share one space")
            self.components[comp.ptype] = comp
        if space is None:
            raise MapError("a mega map needs at least one component")
        self.space = space

    def component(self, ptype: Partition) -> PartitionedMap | None:
        return self.components.get(ptype)

    def plain_component(self, arity: int) -> PartitionedMap | None:
        return self.components.get(Partition((arity,)))

    def plain_only(self) -> bool:
        return all(p.is_plain() for p in self.components)

    def partitions(self) -> list[Partition]:
        return sorted(self.components, key=lambda p: (p.n_args, p.n_slots, p.slots))

    def __repr__(self):
        return f"MegaMap({[str(p) for p in self.partitions()]})"
