"""Suspension signs and the defect operators of homotopy structures.

The checks come in two equivalent shapes: an alternating-sign form on the
original space, and a suspended ("tilde") form in which every component
is shifted to odd degree and signs are pure Koszul in the shifted
grading.  For components whose super degree has the parity of their
argument count the two agree pointwise up to a nonzero factor; inputs
violating that parity are still accepted, flagged, and checked in the
suspended form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .braces import chained, compose, expand, _evaluate_term
from .maps import (
    IDENTITY_SELECTOR,
    MapError,
    MegaMap,
    PartitionedMap,
    ZERO_MAP,
)
from .partitions import IDENTITY_TYPE, Partition, ZERO_TYPE, factorizations
from .spaces import Vector


def omega_exponent(degrees: Sequence[int]) -> int:
    """Suspension twist exponent (k-1)|a1| + ... + |a_{k-1}| + k(k-1)/2."""
    k = len(degrees)
    return sum((k - 1 - i) * d for i, d in enumerate(degrees)) + k * (k - 1) // 2


def tilde_sign(degrees: Sequence[int]) -> Fraction:
    return Fraction(-1) ** (omega_exponent(degrees) % 2)


class TildeMap:
    """A mega map with suspended-sign evaluation of its plain components."""

    def __init__(self, underlying: MegaMap):
        self.underlying = underlying
        self.suspended = True

    def component(self, arity: int) -> PartitionedMap | None:
        return self.underlying.plain_component(arity)

    def evaluate(self, arity: int, names: Sequence[str]) -> Vector:
        comp = self.component(arity)
        space = self.underlying.space
        if comp is None:
            return space.zero_vector()
        degs = [space.super_degree(n) for n in names]
        return comp.entry((tuple(names),)).scale(tilde_sign(degs))

    def shifted_degree(self, arity: int) -> int | None:
        comp = self.component(arity)
        if comp is None:
            return None
        return comp.super_degree + arity - 1


def suspended_degree(comp: PartitionedMap) -> int:
    """Degree of the shifted component: |m| + d + dbar + 1."""
    return comp.super_degree + comp.ptype.d + comp.ptype.dbar + 1


def parity_respecting(m: MegaMap) -> bool:
    """Plain components have super degree of the same parity as arity."""
    out = True
    for ptype, comp in m.components.items():
        if ptype.is_plain():
            if (comp.super_degree - ptype.n_args) % 2 != 0:
                out = False
    return out


def a_infinity_defect(m: MegaMap, n: int) -> PartitionedMap:
    """The alternating sum over j+k = n+1 of {m_j}{m_k} on n arguments."""
    space = m.space
    target = Partition((n,))
    pieces = []
    for j in range(1, n + 1):
        k = n + 1 - j
        mj, mk = m.plain_component(j), m.plain_component(k)
        if mj is None or mk is None:
            continue
        pieces.append((Fraction(-1) ** (j % 2), compose(mj, [mk], target)))
    degree = _common_degree(pieces, 0)

    def rule(key):
        total = space.zero_vector()
        for c, piece in pieces:
            total = total + piece.entry(key).scale(c)
        return total

    return PartitionedMap(space, target, degree, rule=rule, name=f"ainf-defect({n})")


def _common_degree(pieces, fallback):
    degs = {p.super_degree for _, p in pieces}
    if len(degs) > 1:
        raise MapError(f"inhomogeneous defect: component degrees {sorted(degs)}")
    return degs.pop() if degs else fallback


def suspended_square_defect(m: MegaMap, n: int) -> PartitionedMap:
    """{m~}{m~} on n arguments, computed wholly in the shifted grading.

    Signs: each component application carries the suspension twist, the
    inner component crosses the arguments to its left with pure Koszul
    signs in the shifted degrees (|a| - 1 for vectors).
    """
    space = m.space
    target = Partition((n,))
    jobs = []
    for j in range(1, n + 1):
        k = n + 1 - j
        mj, mk = m.plain_component(j), m.plain_component(k)
        if mj is None or mk is None:
            continue
        jobs.append((j, k, mj, mk))
    degree = None
    for j, k, mj, mk in jobs:
        d = mj.super_degree + mk.super_degree
        if degree is None:
            degree = d
        elif degree != d:
            raise MapError("inhomogeneous suspended defect")

    def rule(key):
        names = key[0]
        degs = [space.super_degree(x) for x in names]
        total = space.zero_vector()
        for j, k, mj, mk in jobs:
            shift_k = suspended_degree(mk)
            for p in range(j):
                window = names[p : p + k]
                cross = sum((degs[i] - 1) * shift_k for i in range(p))
                inner = mk.entry((tuple(window),)).scale(
                    tilde_sign(degs[p : p + k]) * Fraction(-1) ** (cross % 2)
                )
                outer_args = [
                    [space.unit_vector(x) for x in names[:p]]
                    + [inner]
                    + [space.unit_vector(x) for x in names[p + k :]]
                ]
                inner_deg = sum(degs[p : p + k]) + mk.super_degree
                outer_degs = degs[:p] + [inner_deg] + degs[p + k :]
                total = total + mj.evaluate(outer_args).scale(tilde_sign(outer_degs))
        return total

    return PartitionedMap(
        space, target, degree if degree is not None else 0, rule=rule,
        name=f"tilde-defect({n})",
    )


def _antisymmetrize_rule(space, base: PartitionedMap, suspended: bool) -> PartitionedMap:
    n = base.ptype.n_args
    perms = list(itertools.permutations(range(n)))

    def rule(key):
        names = key[0]
        total = space.zero_vector()
        for perm in perms:
            exponent = 0
            for i, j in itertools.combinations(range(n), 2):
                if perm.index(i) > perm.index(j):
                    di = space.bidegree(names[i])
                    dj = space.bidegree(names[j])
                    if suspended:
                        exponent += (di.super - 1) * (dj.super - 1)
                    else:
                        exponent += di.super * dj.super + di.d * dj.d
            permuted = tuple(names[p] for p in perm)
            total = total + base.entry((permuted,)).scale(Fraction(-1) ** (exponent % 2))
        return total

    return PartitionedMap(space, base.ptype, base.super_degree, rule=rule)


def l_infinity_defect(m: MegaMap, n: int, form: str = "auto") -> PartitionedMap:
    """Full antisymmetrization of the square defect over all n arguments."""
    form = _resolve_form(m, form)
    base = a_infinity_defect(m, n) if form == "alternating" else suspended_square_defect(m, n)
    return _antisymmetrize_rule(m.space, base, suspended=(form == "suspended"))


def pre_l_infinity_defect(m: MegaMap, n: int, side: str = "right", form: str = "auto") -> PartitionedMap:
    """Square defect antisymmetrized only over one adjacent argument pair."""
    if n < 2:
        raise MapError("pre-L-infinity defects need at least two arguments")
    form = _resolve_form(m, form)
    base = a_infinity_defect(m, n) if form == "alternating" else suspended_square_defect(m, n)
    space = m.space
    if side == "right":
        i, j = n - 2, n - 1
    elif side == "left":
        i, j = 0, 1
    else:
        raise ValueError("side must be 'right' or 'left'")

    def rule(key):
        names = list(key[0])
        di, dj = space.bidegree(names[i]), space.bidegree(names[j])
        if form == "suspended":
            exponent = (di.super - 1) * (dj.super - 1)
        else:
            exponent = di.super * dj.super + di.d * dj.d
        swapped = list(names)
        swapped[i], swapped[j] = swapped[j], swapped[i]
        return base.entry((tuple(names),)) + base.entry((tuple(swapped),)).scale(
            Fraction(-1) ** (exponent % 2)
        )

    return PartitionedMap(space, base.ptype, base.super_degree, rule=rule)


def _resolve_form(m: MegaMap, form: str) -> str:
    if form == "auto":
        return "alternating" if parity_respecting(m) else "suspended"
    if form not in ("alternating", "suspended"):
        raise ValueError("form must be 'auto', 'alternating' or 'suspended'")
    return form


def mega_outer_sign(outer: Partition) -> Fraction:
    # (-1)^(d + dbar); reduces to the alternating (-1)^arity on plain types
    return Fraction(-1) ** ((outer.d + outer.dbar) % 2)


def defect_groups(m: MegaMap, target: Partition, max_inner: int = 2):
    """(outer component, inner components) pairs feeding the sub-identity."""
    groups = []
    seen = set()
    for fac in factorizations(target, max_inner):
        keypair = (fac.outer, fac.inners)
        if keypair in seen:
            continue
        seen.add(keypair)
        outer = m.component(fac.outer)
        if outer is None or outer.kind in (IDENTITY_SELECTOR, ZERO_MAP):
            continue  # distinguished components never head a term
        inners = [m.component(p) for p in fac.inners]
        if any(c is None for c in inners):
            continue
        groups.append((outer, inners))
    return groups


def mega_defect(m: MegaMap, target: Partition, max_inner: int = 2) -> PartitionedMap:
    """Sub-identity defect for one target partition.

    Sums the signed brace compositions over every way the target type
    factors through the structure's components; the structure satisfies
    the identity for this target exactly when the result is the zero map.
    """
    space = m.space
    groups = defect_groups(m, target, max_inner)
    pieces = []
    for outer, inners in groups:
        sign = mega_outer_sign(outer.ptype)
        terms = expand(outer, inners, target)
        if len(inners) > 1:
            terms = [t for t in terms if chained(t.struct)]
        if not terms:
            continue
        pieces.append((sign, outer, inners, terms))

    degrees = {outer.super_degree + sum(y.super_degree for y in inners)
               for _, outer, inners, _ in pieces}
    if len(degrees) > 1:
        raise MapError(
            f"sub-identity for {target} mixes degrees {sorted(degrees)}"
        )
    degree = degrees.pop() if degrees else 0

    def rule(key):
        total = space.zero_vector()
        for sign, outer, inners, terms in pieces:
            for term in terms:
                total = total + _evaluate_term(term, outer, inners, key).scale(sign)
        return total

    return PartitionedMap(space, target, degree, rule=rule, name=f"defect{target}")


def positive_partitions(max_args: int):
    """All partitions with positive slots and at most max_args arguments."""
    out = []
    for total in range(1, max_args + 1):
        for n_slots in range(1, total + 1):
            for combo in itertools.product(range(1, total + 1), repeat=n_slots):
                if sum(combo) == total:
                    out.append(Partition(combo))
    out.sort(key=lambda p: (p.n_args, p.n_slots, p.slots))
    return out


@dataclass
class ReportRow:
    label: str
    terms: int
    ok: bool
    witness: str | None = None


@dataclass
class StructureReport:
    """Outcome of an identity family check, one row per instance."""

    name: str
    rows: list[ReportRow] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return all(row.ok for row in self.rows)

    def add(self, label: str, terms: int, ok: bool, witness=None):
        self.rows.append(ReportRow(label, terms, ok, witness))

    def render(self) -> str:
        lines = [f"check: {self.name}"]
        width = max((len(r.label) for r in self.rows), default=8)
        for row in self.rows:
            status = "zero" if row.ok else "NONZERO"
            line = f"  {row.label:<{width}}  terms={row.terms:<4d} {status}"
            if row.witness:
                line += f"  witness: {row.witness}"
            lines.append(line)
        for s in self.skipped:
            lines.append(f"  skipped: {s}")
        for w in self.warnings:
            lines.append(f"  warning: {w}")
        lines.append(f"verdict: {'PASS' if self.verdict else 'FAIL'}")
        return "\n".join(lines)


def _map_is_zero(defect: PartitionedMap):
    w = defect.first_nonzero()
    if w is None:
        return True, None
    key, value = w
    return False, f"{key} -> {value}"


def check_mega(m: MegaMap, bound: int = 4, max_inner: int = 2,
               name: str = "mega identity") -> StructureReport:
    """Sub-identity sweep over all positive partitions up to the bound."""
    report = StructureReport(name)
    if not parity_respecting(m):
        report.warnings.append(
            "plain component degrees do not match arity parity"
        )
    for target in positive_partitions(bound):
        groups = defect_groups(m, target, max_inner)
        if not groups:
            continue
        defect = mega_defect(m, target, max_inner)
        n_terms = sum(
            len(expand(outer, inners, target)) for outer, inners in groups
        )
        ok, witness = _map_is_zero(defect)
        report.add(str(target), n_terms, ok, witness)
    return report


def is_homotopy_g(m: MegaMap, bound: int = 5, max_inner: int = 2):
    """Check the distinguished components and the sub-identity sweep.

    Returns (verdict, report).  The type (1|0) component must be the
    identity selector and the type (0|1) component, if present, the zero
    map; every sub-identity for positive partitions up to the bound must
    vanish.
    """
    report = StructureReport("homotopy G structure")
    sel = m.component(IDENTITY_TYPE)
    if sel is None or sel.kind != IDENTITY_SELECTOR:
        report.add("(1|0) component", 0, False, "not the identity selector")
    else:
        report.add("(1|0) component", 0, True)
    zero = m.component(ZERO_TYPE)
    if zero is not None and zero.kind != ZERO_MAP and not zero.is_zero():
        report.add("(0|1) component", 0, False, "not the zero map")
    else:
        report.add("(0|1) component", 0, True)
    sweep = check_mega(m, bound, max_inner)
    report.rows.extend(sweep.rows)
    report.warnings.extend(sweep.warnings)
    return report.verdict, report
