"""Signed expansion of brace expressions for plain and partitioned maps.

A brace expression {x}{y1,...,yl} evaluated on a partitioned argument
list places every inner map into the outer one simultaneously, in all
order-preserving ways, and routes the argument blocks through windows and
leftovers.  The rules implemented here:

* The outer map's slots consume consecutive runs of argument blocks; its
  bars separate those runs.
* Each inner map assigns its slots to strictly increasing blocks within
  the hosting run; slot q consumes a window of exactly its size, taken at
  the block's current consumption front.
* Leftover vectors fill the free positions of their run in any order that
  keeps each block's internal order.
* Every internal block boundary of a run must be witnessed by the bar of
  some inner map placed there (adjacent window blocks t, t+1); runs of a
  single block need no witness, so plain expressions reduce to the
  classical multibrace sums.
* An identity-selector inner consumes the tail of its block (nothing of
  the block may follow its chosen element), while the block facing its
  empty slot scatters freely to both sides; the zero-map inner mirrors
  this.

A term's sign is the product of exchange signs over all pairs of symbols
that end up transposed relative to the written order (head, inner maps
left to right, then arguments block by block).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .maps import IDENTITY_SELECTOR, MapError, PartitionedMap, ZERO_MAP
from .partitions import Free, Partition, Slot, SubstitutionPattern
from .spaces import BiDegree, Vector

Atom = tuple  # ('v', block, index) | ('i', inner_index, windows)
Windows = tuple  # of (block, start, size)


def _weak_compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for head in range(total + 1):
        for tail in _weak_compositions(total - head, parts - 1):
            yield (head,) + tail


def _boundaries(g: int, s: int):
    """Weakly increasing cut points 0 = g0 <= ... <= gs = g."""
    for cuts in itertools.combinations_with_replacement(range(g + 1), s - 1):
        yield (0,) + cuts + (g,)


@dataclass(frozen=True)
class StructTerm:
    """One fully placed configuration, independent of the concrete maps."""

    outer: Partition
    inners: tuple[Partition, ...]
    slot_atoms: tuple[tuple[Atom, ...], ...]

    @property
    def placement(self) -> SubstitutionPattern:
        groups = []
        for atoms in self.slot_atoms:
            entries = []
            run = 0
            for atom in atoms:
                if atom[0] == "v":
                    run += 1
                else:
                    if run:
                        entries.append(Free(run))
                        run = 0
                    entries.append(Slot(self.inners[atom[1]]))
            if run:
                entries.append(Free(run))
            groups.append(entries)
        return SubstitutionPattern(groups)

    def reading(self) -> tuple[tuple, ...]:
        """Symbols in the order they appear in the composed expression."""
        out: list[tuple] = [("h",)]
        for atoms in self.slot_atoms:
            for atom in atoms:
                if atom[0] == "v":
                    out.append(("a", atom[1], atom[2]))
                else:
                    out.append(("m", atom[1]))
                    for block, start, size in atom[2]:
                        for k in range(size):
                            out.append(("a", block, start + k))
        return tuple(out)


def _window_assignments(part: Partition, kind: str, ptrs, lo, hi, blocks):
    """All slot-to-block window choices for one inner map."""
    sizes = part.slots

    def rec(q: int, prev_block: int, moved):
        if q == len(sizes):
            yield tuple(moved)
            return
        size = sizes[q]
        # blocks strictly increase, so each block is visited at most once
        for t in range(max(lo, prev_block + 1), hi):
            avail = blocks[t] - ptrs[t]
            if size > avail:
                continue
            if kind == IDENTITY_SELECTOR and q == 0 and size != avail:
                continue  # the chosen element must close its block
            if kind == ZERO_MAP and q == 1 and ptrs[t] != 0:
                continue  # the chosen element must open its block
            moved.append((t, ptrs[t], size))
            yield from rec(q + 1, t, moved)
            moved.pop()

    yield from rec(0, lo - 1, [])


def _slot_sequences(c_j, specs, lo, hi, blocks):
    """Atom sequences for one outer slot.

    specs is the list of (global inner index, Partition, kind) hosted by
    this slot, in order; lo:hi is the block range the slot consumes.
    """
    frees = c_j - len(specs)
    if frees < 0:
        return
    window_total = sum(spec[1].n_args for spec in specs)
    need = sum(blocks[lo:hi])
    if frees + window_total != need:
        return
    ptrs = [0] * len(blocks)

    def remaining_ok(next_inner, frees_left):
        pending = sum(specs[i][1].n_args for i in range(next_inner, len(specs)))
        left = sum(blocks[t] - ptrs[t] for t in range(lo, hi))
        return pending + frees_left == left

    seq: list[Atom] = []

    def rec(next_inner: int, frees_left: int):
        if next_inner == len(specs) and frees_left == 0:
            if all(ptrs[t] == blocks[t] for t in range(lo, hi)):
                yield tuple(seq)
            return
        if frees_left > 0:
            for t in range(lo, hi):
                if ptrs[t] < blocks[t]:
                    seq.append(("v", t, ptrs[t]))
                    ptrs[t] += 1
                    if remaining_ok(next_inner, frees_left - 1):
                        yield from rec(next_inner, frees_left - 1)
                    ptrs[t] -= 1
                    seq.pop()
        if next_inner < len(specs):
            gi, part, kind = specs[next_inner]
            for windows in _window_assignments(part, kind, ptrs, lo, hi, blocks):
                for t, _, size in windows:
                    ptrs[t] += size
                seq.append(("i", gi, windows))
                if remaining_ok(next_inner + 1, frees_left):
                    yield from rec(next_inner + 1, frees_left)
                seq.pop()
                for t, _, size in windows:
                    ptrs[t] -= size

    yield from rec(0, frees)


def _witnessed(atoms: Sequence[Atom], lo: int, hi: int) -> bool:
    """Every internal boundary of the run is marked by some inner's bar."""
    if hi - lo <= 1:
        return True
    marked = set()
    for atom in atoms:
        if atom[0] == "i":
            windows = atom[2]
            for (t1, _, _), (t2, _, _) in zip(windows, windows[1:]):
                if t2 == t1 + 1:
                    marked.add(t1)
    return all(t in marked for t in range(lo, hi - 1))


def chained(term: StructTerm) -> bool:
    """Whether consecutive inner maps overlap in the blocks they touch.

    Identity families built from several simultaneous substitutions only
    involve configurations where each inner map starts strictly before the
    previous one has finished with the argument blocks; side-by-side
    placements belong to the single-substitution terms instead.  Terms
    with one inner map are trivially chained.
    """
    spans = {}
    for atoms in term.slot_atoms:
        for atom in atoms:
            if atom[0] == "i":
                ts = [w[0] for w in atom[2]]
                spans[atom[1]] = (min(ts), max(ts))
    order = sorted(spans)
    for a, b in zip(order, order[1:]):
        if spans[b][0] >= spans[a][1]:
            return False
    return True


def structural_terms(
    outer: Partition,
    inners: tuple[Partition, ...],
    target: Partition,
    kinds: tuple[str, ...] | None = None,
) -> list[StructTerm]:
    """All placed configurations of the given shape for the target type."""
    blocks = target.slots
    g = len(blocks)
    l = len(inners)
    s = outer.n_slots
    if kinds is None:
        kinds = ("table",) * l
    if outer.n_args - l < 0:
        return []
    if (outer.n_args - l) + sum(p.n_args for p in inners) != target.n_args:
        return []

    results: list[StructTerm] = []
    seen = set()
    for split in _weak_compositions(l, s):
        if any(split[j] > outer.slots[j] for j in range(s)):
            continue
        offsets = [0]
        for c in split:
            offsets.append(offsets[-1] + c)
        for bounds in _boundaries(g, s):
            per_slot: list[list[tuple[Atom, ...]]] = []
            dead = False
            for j in range(s):
                specs = [
                    (i, inners[i], kinds[i])
                    for i in range(offsets[j], offsets[j + 1])
                ]
                lo, hi = bounds[j], bounds[j + 1]
                options = [
                    atoms
                    for atoms in _slot_sequences(outer.slots[j], specs, lo, hi, blocks)
                    if _witnessed(atoms, lo, hi)
                ]
                if not options:
                    dead = True
                    break
                per_slot.append(options)
            if dead:
                continue
            for combo in itertools.product(*per_slot):
                term = StructTerm(outer, tuple(inners), tuple(combo))
                key = _dedupe_key(term)
                if key not in seen:
                    seen.add(key)
                    results.append(term)
    results.sort(key=lambda t: (str(t.placement), t.reading()))
    return results


def _dedupe_key(term: StructTerm):
    # the block hosting an empty window is bookkeeping, not a new term
    normal = []
    for atoms in term.slot_atoms:
        row = []
        for atom in atoms:
            if atom[0] == "v":
                row.append(atom)
            else:
                row.append(("i", atom[1], tuple(w for w in atom[2] if w[2] > 0)))
        normal.append(tuple(row))
    return tuple(normal)


@dataclass(frozen=True)
class BraceTerm:
    """A structural term together with its sign data.

    ``sign`` is the sign for arguments of even super degree; evaluation
    recomputes the Koszul factor from the actual argument degrees via the
    stored list of transposed symbol pairs.
    """

    struct: StructTerm
    reading: tuple[tuple, ...]
    inverted_pairs: tuple[tuple[tuple, tuple], ...]
    sign: Fraction

    @property
    def placement(self) -> SubstitutionPattern:
        return self.struct.placement

    def argument_order(self) -> tuple[tuple[int, int], ...]:
        return tuple(tok[1:] for tok in self.reading if tok[0] == "a")


def _inverted_pairs(term: StructTerm, target: Partition):
    reading = term.reading()
    written = [("h",)] + [("m", i) for i in range(len(term.inners))]
    for t, size in enumerate(target.slots):
        for k in range(size):
            written.append(("a", t, k))
    pos = {tok: i for i, tok in enumerate(reading)}
    pairs = []
    for a, b in itertools.combinations(written, 2):
        if pos[a] > pos[b]:
            pairs.append((a, b))
    return reading, tuple(pairs)


def term_sign(
    term: BraceTerm,
    head_deg: BiDegree,
    inner_degs: Sequence[BiDegree],
    arg_degs,
) -> Fraction:
    """Koszul sign of the term for concrete argument bidegrees.

    arg_degs maps (block, index) to a BiDegree.
    """
    exponent = 0
    for a, b in term.inverted_pairs:
        da = _token_degree(a, head_deg, inner_degs, arg_degs)
        db = _token_degree(b, head_deg, inner_degs, arg_degs)
        exponent += da.super * db.super + da.d * db.d
    return Fraction(1) if exponent % 2 == 0 else Fraction(-1)


def _token_degree(tok, head_deg, inner_degs, arg_degs) -> BiDegree:
    if tok[0] == "h":
        return head_deg
    if tok[0] == "m":
        return inner_degs[tok[1]]
    return arg_degs[(tok[1], tok[2])]


def expand(
    x: PartitionedMap,
    ys: Sequence[PartitionedMap],
    target: Partition,
) -> list[BraceTerm]:
    """Complete signed term list of {x}{y1,...,yl} for the target type."""
    kinds = tuple(y.kind for y in ys)
    struct = structural_terms(x.ptype, tuple(y.ptype for y in ys), target, kinds)
    head_deg = BiDegree(x.super_degree, x.ptype.d)
    inner_degs = [BiDegree(y.super_degree, y.ptype.d) for y in ys]
    even = {
        (t, k): BiDegree(0, -1)
        for t, size in enumerate(target.slots)
        for k in range(size)
    }
    out = []
    for st in struct:
        reading, pairs = _inverted_pairs(st, target)
        bt = BraceTerm(st, reading, pairs, Fraction(1))
        sign = term_sign(bt, head_deg, inner_degs, even)
        out.append(BraceTerm(st, reading, pairs, sign))
    return out


def _evaluate_term(
    term: BraceTerm,
    x: PartitionedMap,
    ys: Sequence[PartitionedMap],
    key,
) -> Vector:
    """Value of one placed term on a basis tuple grouped by target slots."""
    space = x.space
    head_deg = BiDegree(x.super_degree, x.ptype.d)
    inner_degs = [BiDegree(y.super_degree, y.ptype.d) for y in ys]
    arg_degs = {
        (t, k): space.bidegree(name)
        for t, part in enumerate(key)
        for k, name in enumerate(part)
    }
    sign = term_sign(term, head_deg, inner_degs, arg_degs)

    outer_args: list[list[Vector]] = []
    for atoms in term.struct.slot_atoms:
        slot_vectors: list[Vector] = []
        for atom in atoms:
            if atom[0] == "v":
                slot_vectors.append(space.unit_vector(key[atom[1]][atom[2]]))
            else:
                y = ys[atom[1]]
                inner_key = tuple(
                    tuple(key[t][start : start + size])
                    for t, start, size in atom[2]
                )
                slot_vectors.append(y.entry(inner_key))
        outer_args.append(slot_vectors)
    return x.evaluate(outer_args).scale(sign)


def compose(
    x: PartitionedMap,
    ys: Sequence[PartitionedMap],
    target: Partition | None = None,
) -> PartitionedMap:
    """The map of the target type given by the signed sum of all terms."""
    ys = list(ys)
    if target is None:
        if not x.ptype.is_plain() or any(not y.ptype.is_plain() for y in ys):
            raise MapError("a target partition is required for partitioned braces")
        arity = x.ptype.n_args - len(ys) + sum(y.ptype.n_args for y in ys)
        target = Partition((arity,))
    terms = expand(x, ys, target)
    space = x.space
    super_degree = x.super_degree + sum(y.super_degree for y in ys)

    def rule(key):
        total = space.zero_vector()
        for term in terms:
            total = total + _evaluate_term(term, x, ys, key)
        return total

    label = "{" + (x.name or "?") + "}{" + ",".join(y.name or "?" for y in ys) + "}"
    return PartitionedMap(space, target, super_degree, rule=rule, name=label)


def g_bracket(x: PartitionedMap, y: PartitionedMap) -> PartitionedMap:
    """Gerstenhaber bracket [x,y] = {x}{y} -+ {y}{x}.

    Defined whenever both braces make sense for a common target: both maps
    plain, or one of them linear of type (1) against a partitioned one.
    """
    if x.ptype.is_plain() and y.ptype.is_plain():
        target = Partition((x.ptype.n_args + y.ptype.n_args - 1,))
    elif x.ptype == Partition((1,)):
        target = y.ptype
    elif y.ptype == Partition((1,)):
        target = x.ptype
    else:
        raise MapError(f"no bracket for types {x.ptype} and {y.ptype}")
    exponent = x.super_degree * y.super_degree + x.ptype.d * y.ptype.d
    sign = Fraction(-1) if exponent % 2 else Fraction(1)
    left = compose(x, [y], target)
    right = compose(y, [x], target).scale(sign)
    return left - right


def nested_configurations(layers: Sequence[Sequence[PartitionedMap]]):
    """Host assignments for a nested brace expression.

    Every symbol may enter the head (host None) or any symbol of a
    strictly earlier layer.  For each host, children from different layers
    interleave in all order-preserving ways.  Yields (sign, order_of)
    where order_of maps each host to the ordered list of its children and
    the sign collects the exchange factors of the reordering of the
    original symbols.
    """
    symbols = [(r, i, m) for r, layer in enumerate(layers) for i, m in enumerate(layer)]

    def degree(k):
        m = symbols[k][2]
        return BiDegree(m.super_degree, m.ptype.d)

    def forests():
        def rec(k, hosts):
            if k == len(symbols):
                yield tuple(hosts)
                return
            r = symbols[k][0]
            for c in [None] + [j for j in range(len(symbols)) if symbols[j][0] < r]:
                hosts.append(c)
                yield from rec(k + 1, hosts)
                hosts.pop()

        yield from rec(0, [])

    host_keys: list = [None] + list(range(len(symbols)))
    for hosts in forests():
        children_of: dict = {h: [] for h in host_keys}
        for k, h in enumerate(hosts):
            children_of[h].append(k)

        per_host_orders = []
        for h in host_keys:
            by_layer: dict[int, list[int]] = {}
            for k in children_of[h]:
                by_layer.setdefault(symbols[k][0], []).append(k)
            layer_lists = [by_layer[r] for r in sorted(by_layer)]
            per_host_orders.append(list(_interleavings(layer_lists)))

        for combo in itertools.product(*per_host_orders):
            order_of = dict(zip(host_keys, combo))
            reading: list[int] = []

            def visit(k):
                reading.append(k)
                for c in order_of[k]:
                    visit(c)

            for k in order_of[None]:
                visit(k)
            position = {k: i for i, k in enumerate(reading)}
            exponent = 0
            for a, b in itertools.combinations(range(len(symbols)), 2):
                if position[a] > position[b]:
                    da, db = degree(a), degree(b)
                    exponent += da.super * db.super + da.d * db.d
            sign = Fraction(-1) ** (exponent % 2)
            yield sign, order_of


def _interleavings(lists):
    if not lists:
        yield ()
        return
    if len(lists) == 1:
        yield tuple(lists[0])
        return

    def rec(rem):
        if all(not r for r in rem):
            yield ()
            return
        for i, r in enumerate(rem):
            if r:
                rest = [list(x) for x in rem]
                head = rest[i].pop(0)
                for tail in rec(rest):
                    yield (head,) + tail

    yield from rec([list(x) for x in lists])


def compose_nested(
    head: PartitionedMap, layers: Sequence[Sequence[PartitionedMap]]
) -> PartitionedMap:
    """Value of {head}{layer1}...{layerR} as a single plain map.

    Only plain maps may appear; vectors enter as 0-linear maps.  The
    expansion matches the recursive rule where each later symbol may be
    substituted into the head or into any earlier symbol.
    """
    if not head.ptype.is_plain() or any(
        not m.ptype.is_plain() for layer in layers for m in layer
    ):
        raise MapError("nested braces are defined for plain maps only")
    symbols = [(r, i, m) for r, layer in enumerate(layers) for i, m in enumerate(layer)]
    space = head.space
    super_degree = head.super_degree + sum(m.super_degree for _, _, m in symbols)
    arity = head.ptype.n_args + sum(m.ptype.n_args - 1 for _, _, m in symbols)
    if arity < 0:
        raise MapError("nested expression consumes more symbols than available")
    target = Partition((arity,))

    pieces: list[tuple[Fraction, PartitionedMap]] = []
    for sign, order_of in nested_configurations(layers):

        def build(k) -> PartitionedMap | None:
            m = symbols[k][2]
            kids = order_of[k]
            if not kids:
                return m
            built = [build(c) for c in kids]
            if any(b is None for b in built):
                return None
            if m.ptype.n_args < len(built):
                return None
            return compose(m, built)

        children = [build(k) for k in order_of[None]]
        if any(c is None for c in children):
            continue
        if head.ptype.n_args < len(children):
            continue
        pieces.append((sign, compose(head, children, target)))

    def rule(key):
        total = space.zero_vector()
        for sign, piece in pieces:
            total = total + piece.entry(key).scale(sign)
        return total

    return PartitionedMap(space, target, super_degree, rule=rule, name="nested")
