"""Partitions, substitution patterns, splittings, unshuffles and counting.

A partition (j1|j2|...|js) records how a multilinear map groups its
arguments into slots; a plain n-linear map is the one-slot partition (n).
Substitution patterns describe where specific maps and runs of free
arguments are placed inside an outer map, and merging computes the
partition type of the composite.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .spaces import BiDegree, exchange_sign


class Partition:
    """Ordered list of nonnegative slot sizes, at least one slot."""

    __slots__ = ("slots",)

    def __init__(self, slots: Iterable[int]):
        slots = tuple(int(s) for s in slots)
        if not slots:
            raise ValueError("a partition needs at least one slot")
        if any(s < 0 for s in slots):
            raise ValueError(f"negative slot size in {slots}")
        object.__setattr__(self, "slots", slots)

    @property
    def n_args(self) -> int:
        return sum(self.slots)

    @property
    def n_slots(self) -> int:
        return len(self.slots)

    @property
    def d(self) -> int:
        return sum(self.slots) - 1

    @property
    def dbar(self) -> int:
        return len(self.slots) - 2

    def is_plain(self) -> bool:
        return len(self.slots) == 1

    def is_positive(self) -> bool:
        return all(s > 0 for s in self.slots)

    def __eq__(self, other):
        return isinstance(other, Partition) and self.slots == other.slots

    def __hash__(self):
        return hash(self.slots)

    def __repr__(self):
        return f"Partition({self.slots})"

    def __str__(self):
        return "(" + "|".join(str(s) for s in self.slots) + ")"

    @staticmethod
    def parse(text: str) -> "Partition":
        text = text.strip()
        if text.startswith("(") and text.endswith(")"):
            text = text[1:-1]
        return Partition(int(t) for t in text.split("|"))


PLAIN_1 = Partition((1,))
IDENTITY_TYPE = Partition((1, 0))
ZERO_TYPE = Partition((0, 1))


@dataclass(frozen=True)
class Free:
    """A run of consecutive empty arguments of the outer map."""

    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("a free run must have positive length")


@dataclass(frozen=True)
class Slot:
    """A specific (partitioned) map placed into one argument."""

    partition: Partition


Entry = Free | Slot


class SubstitutionPattern:
    """Placement symbol such as ((2),(1),4,(3),(0)) or ((1|2),3,(5|7)|6).

    Entries are grouped by the outer map's slots; within a group they are
    comma-separated, groups are separated by bars.
    """

    __slots__ = ("groups",)

    def __init__(self, groups: Iterable[Iterable[Entry]]):
        self.groups = tuple(tuple(g) for g in groups)
        if not self.groups:
            raise ValueError("pattern needs at least one group")

    @staticmethod
    def plain(entries: Iterable[Entry]) -> "SubstitutionPattern":
        return SubstitutionPattern([tuple(entries)])

    @property
    def arity(self) -> int:
        """Number of arguments of the produced map (all integers added up)."""
        total = 0
        for g in self.groups:
            for e in g:
                total += e.count if isinstance(e, Free) else e.partition.n_args
        return total

    def inner_partitions(self) -> list[Partition]:
        return [e.partition for g in self.groups for e in g if isinstance(e, Slot)]

    def merge(self) -> Partition:
        """Partition type of the composite map.

        Inner parentheses are erased, bars are kept, commas become plus
        signs; a free run of length r behaves like the plain partition (r)
        and a group with no entries contributes an empty slot.
        """
        merged: list[int] = []
        for group in self.groups:
            parts: list[int] | None = None
            for e in group:
                pieces = [e.count] if isinstance(e, Free) else list(e.partition.slots)
                if parts is None:
                    parts = pieces
                else:
                    parts[-1] += pieces[0]
                    parts.extend(pieces[1:])
            merged.extend(parts if parts is not None else [0])
        return Partition(merged)

    def __eq__(self, other):
        return isinstance(other, SubstitutionPattern) and self.groups == other.groups

    def __hash__(self):
        return hash(self.groups)

    def __repr__(self):
        return f"SubstitutionPattern.parse({str(self)!r})"

    def __str__(self):
        rendered_groups = []
        for g in self.groups:
            parts = []
            for e in g:
                if isinstance(e, Free):
                    parts.append(str(e.count))
                else:
                    parts.append(str(e.partition))
            rendered_groups.append(",".join(parts))
        return "(" + "|".join(rendered_groups) + ")"

    @staticmethod
    def parse(text: str) -> "SubstitutionPattern":
        text = text.strip()
        if not (text.startswith("(") and text.endswith(")")):
            raise ValueError(f"pattern must be parenthesized: {text!r}")
        body = text[1:-1]
        groups: list[list[Entry]] = [[]]
        depth = 0
        token = ""

        def flush(tok: str, target: list[Entry]):
            tok = tok.strip()
            if not tok:
                return
            if tok.startswith("("):
                target.append(Slot(Partition.parse(tok)))
            else:
                target.append(Free(int(tok)))

        for ch in body:
            if ch == "(":
                depth += 1
                token += ch
            elif ch == ")":
                depth -= 1
                token += ch
            elif ch == "," and depth == 0:
                flush(token, groups[-1])
                token = ""
            elif ch == "|" and depth == 0:
                flush(token, groups[-1])
                token = ""
                groups.append([])
            else:
                token += ch
        flush(token, groups[-1])
        return SubstitutionPattern(groups)


def merge(groups: Iterable[Iterable[Partition | int]]) -> Partition:
    """Merge partitions (and free runs given as ints) grouped by bars."""
    entries = [[Free(e) if isinstance(e, int) else Slot(e) for e in g] for g in groups]
    return SubstitutionPattern(entries).merge()


class CompositionError(ValueError):
    pass


def compose_patterns(outer: SubstitutionPattern, inner: SubstitutionPattern) -> SubstitutionPattern:
    """Composite of two substitution operators.

    Free runs on the right are first expanded into runs of plain (1)
    entries; each parenthesized entry of the outer operator then consumes
    as many right-hand entries as it has arguments, adding them up (with
    bars kept for partitioned outer entries).  Free runs on the outer
    operator are copied verbatim.
    """
    supply: list[Entry] = []
    for g in inner.groups:
        if len(inner.groups) > 1:
            raise CompositionError("right operand of a composition must be plain")
        for e in g:
            if isinstance(e, Free):
                supply.extend(Slot(PLAIN_1) for _ in range(e.count))
            else:
                supply.append(e)

    demand = sum(
        e.partition.n_args for g in outer.groups for e in g if isinstance(e, Slot)
    )
    if demand != len(supply):
        raise CompositionError(
            f"outer operator consumes {demand} maps but {len(supply)} were supplied"
        )

    pos = 0
    new_groups: list[list[Entry]] = []
    for g in outer.groups:
        new_group: list[Entry] = []
        for e in g:
            if isinstance(e, Free):
                new_group.append(e)
                continue
            taken = supply[pos : pos + e.partition.n_args]
            pos += e.partition.n_args
            # group the consumed entries by the slots of e.partition and merge
            sub_groups: list[list[Entry]] = []
            k = 0
            for size in e.partition.slots:
                sub_groups.append(list(taken[k : k + size]))
                k += size
            new_group.append(Slot(SubstitutionPattern(sub_groups).merge()))
        new_groups.append(new_group)
    return SubstitutionPattern(new_groups)


@dataclass(frozen=True)
class Splitting:
    """Per argument slot j, a triple (u_j, i_j, v_j) with u+i+v = n_j."""

    triples: tuple[tuple[int, int, int], ...]

    @property
    def lefts(self):
        return tuple(t[0] for t in self.triples)

    @property
    def rights(self):
        return tuple(t[2] for t in self.triples)


def enumerate_splittings(arg_slots: Sequence[int], inner_slots: Sequence[int]) -> list[Splitting]:
    """All ways of cutting each slot into left / consumed / right pieces.

    The middle piece of slot j has exactly inner_slots[j] elements.  If any
    slot is too small the substitution is impossible and the list is empty.
    """
    if len(arg_slots) != len(inner_slots):
        raise ValueError("slot lists must have equal length")
    if any(i > n for n, i in zip(arg_slots, inner_slots)):
        return []
    ranges = [range(n - i + 1) for n, i in zip(arg_slots, inner_slots)]
    out = []
    for lefts in itertools.product(*ranges):
        triples = tuple(
            (u, i, n - i - u) for u, n, i in zip(lefts, arg_slots, inner_slots)
        )
        out.append(Splitting(triples))
    return out


@dataclass(frozen=True)
class Unshuffle:
    """A permutation of concatenated blocks preserving each block's order.

    ``order`` lists (block index, position within block) pairs in their
    shuffled order; ``sign`` is the product of exchange signs over the
    crossings relative to the block-by-block order.
    """

    order: tuple[tuple[int, int], ...]
    sign: Fraction


def unshuffles(blocks: Sequence[Sequence[BiDegree]]) -> list[Unshuffle]:
    """All order-preserving interleavings of the given blocks, with signs."""
    labelled = [
        [(bi, pi) for pi in range(len(block))] for bi, block in enumerate(blocks)
    ]
    flat = [item for block in labelled for item in block]
    degs = {(bi, pi): blocks[bi][pi] for bi, pi in flat}

    def interleavings(rem: list[list]):
        if all(not b for b in rem):
            yield ()
            return
        for i, b in enumerate(rem):
            if b:
                head = b[0]
                rest = [list(x) for x in rem]
                rest[i] = rest[i][1:]
                for tail in interleavings(rest):
                    yield (head,) + tail

    out = []
    for order in interleavings([list(b) for b in labelled]):
        position = {item: i for i, item in enumerate(order)}
        sign = Fraction(1)
        for a, b in itertools.combinations(flat, 2):
            if position[a] > position[b]:
                sign *= exchange_sign(degs[a], degs[b])
        out.append(Unshuffle(order, sign))
    return out


def count_unshuffles(sizes: Sequence[int]) -> int:
    """Binomial product counting the unshuffles of blocks of given sizes."""
    total = sum(sizes)
    count = 1
    rest = total
    for u in sizes:
        count *= math.comb(rest, u)
        rest -= u
    return count


def count_terms(arg_slots: Sequence[int], inner_slots: Sequence[int]) -> int:
    """Number of terms when one partitioned map enters a plain one.

    Evaluates the double sum of unshuffle counts over all splittings of
    the argument slots around the consumed middles.
    """
    if len(arg_slots) != len(inner_slots):
        raise ValueError("slot lists must have equal length")
    total = 0
    for s in enumerate_splittings(arg_slots, inner_slots):
        total += count_unshuffles(s.lefts) * count_unshuffles(s.rights)
    return total


@dataclass(frozen=True)
class Factorization:
    """One way a target type arises from substituting maps into a map.

    ``placements`` lists the distinct position patterns realizing it; the
    number of expansion terms is typically larger (leftover interleavings).
    """

    outer: Partition
    inners: tuple[Partition, ...]
    placements: tuple[SubstitutionPattern, ...]


def _candidate_inners(target: Partition, max_args: int) -> list[Partition]:
    """Positive partitions plus the two distinguished zero-slot types."""
    sizes = range(1, max(target.slots) + 1 if target.n_args else 1)
    out: list[Partition] = [IDENTITY_TYPE, ZERO_TYPE]
    for n_slots in range(1, target.n_slots + 1):
        for combo in itertools.product(sizes, repeat=n_slots):
            if sum(combo) <= max_args:
                out.append(Partition(combo))
    return out


def factorizations(target: Partition, max_inner: int = 2) -> list[Factorization]:
    """All substitution configurations producing the target type.

    Returns one entry per (outer, ordered inners) pair, carrying the
    distinct placement patterns.  Zero-slot inners are restricted to the
    distinguished identity-selector and zero-map types and only occur as a
    sole inner; multiple inners must form an overlapping chain, matching
    the term calculus in :mod:`multibraces.braces`.
    """
    from .braces import chained, structural_terms  # local import, avoids a cycle

    N = target.n_args
    results: list[Factorization] = []
    inners_pool = _candidate_inners(target, N)
    for k in range(1, max_inner + 1):
        for inners in itertools.product(inners_pool, repeat=k):
            if k > 1 and any(not p.is_positive() for p in inners):
                continue
            consumed = sum(p.n_args for p in inners)
            free = N - consumed
            if free < 0:
                continue
            outer_args = free + k
            # outer slot shapes: compositions of outer_args into <= slots
            for n_slots in range(1, min(outer_args, target.n_slots) + 1):
                for shape in itertools.product(range(1, outer_args + 1), repeat=n_slots):
                    if sum(shape) != outer_args:
                        continue
                    outer = Partition(shape)
                    terms = structural_terms(outer, tuple(inners), target)
                    if k > 1:
                        terms = [t for t in terms if chained(t)]
                    if not terms:
                        continue
                    placements = tuple(
                        sorted({t.placement for t in terms}, key=str)
                    )
                    results.append(Factorization(outer, tuple(inners), placements))
    results.sort(key=lambda f: (str(f.outer), [str(p) for p in f.inners]))
    return results
