"""Truncated Hochschild space of a finite algebra and its brace structure.

Elements are plain multilinear maps on the base space of arity at most
the cap, encoded as basis vectors of a graded space whose d-degree is the
element's arity minus one.  The operators built here output elements
again; results whose arity would exceed the cap are truncated to zero and
the offending inputs recorded, while identity checks skip any instance in
which an intermediate value would not be representable.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .braces import chained, compose, expand, g_bracket, _evaluate_term
from .homotopy import StructureReport, defect_groups, mega_outer_sign, positive_partitions
from .maps import (
    IDENTITY_SELECTOR,
    MapError,
    MegaMap,
    PartitionedMap,
    ZERO_MAP,
    identity_selector,
    zero_map,
)
from .partitions import IDENTITY_TYPE, Partition, ZERO_TYPE
from .spaces import GradedSpace, Vector


class TruncatedHochschild:
    """Plain maps of arity <= cap on a base space, as a graded space."""

    def __init__(self, base: GradedSpace, cap: int):
        self.base = base
        self.cap = cap
        names, supers, weights, d_els = [], [], [], []
        self._decode: dict[str, tuple[tuple[str, ...], str]] = {}
        for arity in range(cap + 1):
            for ins in itertools.product(base.basis, repeat=arity):
                for out in base.basis:
                    name = self.element_name(ins, out)
                    names.append(name)
                    supers.append(
                        base.super_degree(out) - sum(base.super_degree(i) for i in ins)
                    )
                    weights.append(
                        base.weight(out) - sum(base.weight(i) for i in ins)
                    )
                    d_els.append(arity - 1)
                    self._decode[name] = (ins, out)
        self.space = GradedSpace(names, supers, weights, d_els)

    @staticmethod
    def element_name(ins, out) -> str:
        return "[" + ",".join(ins) + ">" + out + "]"

    def decode(self, name: str) -> tuple[tuple[str, ...], str]:
        return self._decode[name]

    def arity(self, name: str) -> int:
        return len(self._decode[name][0])

    def realize(self, name: str) -> PartitionedMap:
        """The element as a concrete plain map on the base space."""
        ins, out = self._decode[name]
        table = {(ins,): self.base.unit_vector(out)}
        deg = self.space.super_degree(name)
        return PartitionedMap(
            self.base, Partition((len(ins),)), deg, table=table, name=name
        )

    def encode_map(self, pm: PartitionedMap) -> tuple[Vector, bool]:
        """Decompose a plain map on the base into element coordinates.

        Returns (vector, overflowed); maps of arity beyond the cap encode
        as zero with the flag set.
        """
        if not pm.ptype.is_plain():
            raise MapError("only plain maps embed in the truncated space")
        arity = pm.ptype.n_args
        if arity > self.cap:
            return self.space.zero_vector(), True
        coeffs: dict[str, Fraction] = {}
        for ins in itertools.product(self.base.basis, repeat=arity):
            value = pm.entry((ins,))
            for out, c in value.coeffs.items():
                coeffs[self.element_name(ins, out)] = c
        return Vector(self.space, coeffs), False

    def encode_flat(self, pm: PartitionedMap, arity: int) -> tuple[Vector, bool]:
        """Encode a possibly partitioned map by flattening its slots."""
        if arity > self.cap:
            return self.space.zero_vector(), True
        coeffs: dict[str, Fraction] = {}
        for ins in itertools.product(self.base.basis, repeat=arity):
            key = []
            i = 0
            for size in pm.ptype.slots:
                key.append(tuple(ins[i : i + size]))
                i += size
            value = pm.entry(tuple(key))
            for out, c in value.coeffs.items():
                coeffs[self.element_name(ins, out)] = c
        return Vector(self.space, coeffs), False


def _encoding_rule(h: TruncatedHochschild, build):
    """Wrap a map-building function into an element-valued table rule."""

    def rule(key):
        pm = build(key)
        if pm is None:
            return h.space.zero_vector()
        vec, overflowed = h.encode_map(pm)
        return vec

    return rule


def gv_structure(h: TruncatedHochschild, m2: PartitionedMap, max_brace: int = 4) -> MegaMap:
    """Brace-calculus operators on the truncated Hochschild space.

    m2 must be an even associative bilinear map on the base space.  The
    components are the bracket with m2, the induced dot product, the
    identity selector, and the higher braces of one element over several.
    """
    if m2.ptype != Partition((2,)) or m2.super_degree % 2 != 0:
        raise MapError("the base product must be even and bilinear")
    if not compose(m2, [m2]).is_zero():
        raise MapError("the base product is not associative")

    comps = []

    def build_m1(key):
        x = h.realize(key[0][0])
        return g_bracket(m2, x)

    M1 = PartitionedMap(
        h.space, Partition((1,)), m2.super_degree,
        rule=_encoding_rule(h, build_m1), name="M(1)",
    )
    M1.arity_shift = 1
    comps.append(M1)

    def build_m2(key):
        x, y = (h.realize(n) for n in key[0])
        return compose(m2, [x, y])

    M2 = PartitionedMap(
        h.space, Partition((2,)), m2.super_degree,
        rule=_encoding_rule(h, build_m2), name="M(2)",
    )
    M2.arity_shift = 0
    comps.append(M2)

    sel = identity_selector(h.space)
    sel.arity_shift = 0
    comps.append(sel)

    for n in range(1, max_brace + 1):

        def build_brace(key, _n=n):
            x = h.realize(key[0][0])
            ys = [h.realize(nm) for nm in key[1]]
            if x.ptype.n_args < _n:
                return None
            return compose(x, ys)

        Mn = PartitionedMap(
            h.space, Partition((1, n)), 0,
            rule=_encoding_rule(h, build_brace), name=f"M(1|{n})",
        )
        Mn.arity_shift = -n
        comps.append(Mn)

    return MegaMap(comps)


def lift(h: TruncatedHochschild, m: MegaMap) -> MegaMap:
    """Transport a structure on the base to the truncated Hochschild space.

    Each plain component acts by substituting the argument elements into
    it; the identity selector and the zero map lift to their distinguished
    counterparts.  Partitioned table components are not supported, since
    their composites leave the plain truncated space.
    """
    comps = []
    for ptype, comp in m.components.items():
        if comp.kind == IDENTITY_SELECTOR:
            lifted = identity_selector(h.space)
            lifted.arity_shift = 0
        elif comp.kind == ZERO_MAP:
            lifted = zero_map(h.space)
            lifted.arity_shift = 0
        elif ptype.is_plain():

            def build(key, _comp=comp):
                xs = [h.realize(n) for n in key[0]]
                return compose(_comp, xs)

            lifted = PartitionedMap(
                h.space, ptype, comp.super_degree,
                rule=_encoding_rule(h, build), name=f"lift{ptype}",
            )
            lifted.arity_shift = 0
        else:
            raise MapError(f"cannot lift a table component of type {ptype}")
        comps.append(lifted)
    return MegaMap(comps)


def lift_operator(h: TruncatedHochschild, beta: PartitionedMap) -> PartitionedMap:
    """Lift a linear operator by post-composition with the elements."""
    if beta.ptype != Partition((1,)):
        raise MapError("only linear operators lift this way")

    def build(key):
        x = h.realize(key[0][0])
        return compose(beta, [x])

    lifted = PartitionedMap(
        h.space, Partition((1,)), beta.super_degree,
        rule=_encoding_rule(h, build), name=f"lift[{beta.name}]",
    )
    lifted.arity_shift = 0
    return lifted


def commutator_lift(h: TruncatedHochschild, comp: PartitionedMap) -> PartitionedMap:
    """The bracket-style linear operator x -> [comp, x].

    This is the alternative that fails to square to zero when the source
    structure is not homotopy associative; kept for contrast with the
    substitution lift.
    """

    def build(key):
        x = h.realize(key[0][0])
        return g_bracket(comp, x)

    lifted = PartitionedMap(
        h.space, Partition((1,)), comp.super_degree,
        rule=_encoding_rule(h, build), name="commutator-lift",
    )
    lifted.arity_shift = comp.ptype.d
    return lifted


def _group_terms(m: MegaMap, target: Partition, max_inner: int):
    out = []
    for outer, inners in defect_groups(m, target, max_inner):
        terms = expand(outer, inners, target)
        if len(inners) > 1:
            terms = [t for t in terms if chained(t.struct)]
        if terms:
            out.append((mega_outer_sign(outer.ptype), outer, inners, terms))
    return out


def _instance_fits(h: TruncatedHochschild, groups, key, cap) -> bool:
    """Whether every intermediate and final arity stays within the cap."""
    arities = {
        (t, k): h.arity(name)
        for t, part in enumerate(key)
        for k, name in enumerate(part)
    }
    total = sum(arities.values())
    for _, outer, inners, terms in groups:
        shifts = [getattr(c, "arity_shift", 0) for c in inners]
        outer_shift = getattr(outer, "arity_shift", 0)
        final = total + outer_shift + sum(shifts)
        if final > cap:
            return False
        for term in terms:
            for atoms in term.struct.slot_atoms:
                for atom in atoms:
                    if atom[0] != "i":
                        continue
                    consumed = sum(
                        arities[(t, start + j)]
                        for t, start, size in atom[2]
                        for j in range(size)
                    )
                    inter = consumed + shifts[atom[1]]
                    if inter > cap:
                        return False
    return True


def sweep_hochschild(
    m: MegaMap,
    h: TruncatedHochschild,
    bound: int = 4,
    max_inner: int = 2,
    name: str = "hochschild structure",
    max_total_arity: int | None = None,
) -> StructureReport:
    """Sub-identity sweep on element tuples, skipping capped instances."""
    report = StructureReport(name)
    cap = h.cap
    by_arity: dict[int, list[str]] = {}
    for nm in h.space.basis:
        by_arity.setdefault(h.arity(nm), []).append(nm)
    budget = max_total_arity if max_total_arity is not None else 2 * cap

    for target in positive_partitions(bound):
        groups = _group_terms(m, target, max_inner)
        if not groups:
            continue
        n = target.n_args
        n_terms = sum(len(terms) for _, _, _, terms in groups)
        checked = 0
        skipped_profiles = set()
        witness = None
        for profile in itertools.product(range(cap + 1), repeat=n):
            if sum(profile) > budget:
                skipped_profiles.add(profile)
                continue
            pools = [by_arity[a] for a in profile]
            probe = None
            for flat in itertools.product(*pools):
                key = []
                i = 0
                for size in target.slots:
                    key.append(tuple(flat[i : i + size]))
                    i += size
                key = tuple(key)
                if probe is None:
                    probe = _instance_fits(h, groups, key, cap)
                    if not probe:
                        skipped_profiles.add(profile)
                        break
                value = h.space.zero_vector()
                for sign, outer, inners, terms in groups:
                    for term in terms:
                        value = value + _evaluate_term(term, outer, inners, key).scale(sign)
                checked += 1
                if not value.is_zero() and witness is None:
                    witness = f"{key} -> {value}"
        ok = witness is None
        report.add(f"{target} [{checked} instances]", n_terms, ok, witness)
        if skipped_profiles:
            report.skipped.append(
                f"{target}: {len(skipped_profiles)} arity profiles beyond cap {cap}"
            )
        if not ok:
            break
    return report


def check_gv_identities(
    m: MegaMap, h: TruncatedHochschild, bound: int = 4, max_inner: int = 2,
    max_total_arity: int | None = None,
) -> StructureReport:
    return sweep_hochschild(
        m, h, bound, max_inner, name="brace-calculus identities",
        max_total_arity=max_total_arity,
    )


def transport_check(
    h: TruncatedHochschild,
    source: MegaMap,
    lifted: MegaMap,
    targets,
    max_inner: int = 2,
    max_total_arity: int | None = None,
) -> StructureReport:
    """Defect of the lift equals the lifted defect of the source.

    For each target partition the sub-identity defect of the lifted
    structure, applied to a tuple of elements, must coincide with the
    source defect substituted over those elements, value by value.
    """
    from .homotopy import mega_defect

    report = StructureReport("lift transports defects")
    cap = h.cap
    budget = max_total_arity if max_total_arity is not None else cap
    for target in targets:
        lifted_groups = _group_terms(lifted, target, max_inner)
        source_defect = mega_defect(source, target, max_inner)
        by_arity: dict[int, list[str]] = {}
        for nm in h.space.basis:
            by_arity.setdefault(h.arity(nm), []).append(nm)
        n = target.n_args
        witness = None
        checked = 0
        for profile in itertools.product(range(cap + 1), repeat=n):
            if sum(profile) > budget:
                continue
            pools = [by_arity[a] for a in profile]
            for flat in itertools.product(*pools):
                key = []
                i = 0
                for size in target.slots:
                    key.append(tuple(flat[i : i + size]))
                    i += size
                key = tuple(key)
                if lifted_groups and not _instance_fits(h, lifted_groups, key, cap):
                    continue
                lhs = h.space.zero_vector()
                for sign, outer, inners, terms in lifted_groups:
                    for term in terms:
                        lhs = lhs + _evaluate_term(term, outer, inners, key).scale(sign)
                xs = [h.realize(nm) for part in key for nm in part]
                arity = sum(x.ptype.n_args for x in xs)
                rhs_map = compose(
                    source_defect,
                    xs,
                    _composite_type(target, key, h),
                )
                rhs, overflow = h.encode_flat(rhs_map, arity)
                checked += 1
                if lhs != rhs and witness is None:
                    witness = f"{key}: lifted {lhs} vs source {rhs}"
        report.add(f"{target} [{checked} instances]", 0, witness is None, witness)
    return report


def _composite_type(target: Partition, key, h: TruncatedHochschild) -> Partition:
    parts = []
    for t, size in enumerate(target.slots):
        parts.append(sum(h.arity(nm) for nm in key[t]))
    return Partition(parts)
