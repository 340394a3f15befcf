"""Paired tensors: partial trace-invariants with matched free index pairs,
their melonic graphs, grouping and ungrouping, asymptotic moments and free
cumulants, centering, and the three-way asymptotic tensor-freeness checker.

An element of the generated set is stored by its first-order invariant
(sigma over its regular tensors), the set of cut edges (color, white vertex)
whose endpoints became the paired free slots, and the generator word.  A
paired graph is encoded by a system of cycles per color over (thick edge,
shade) slots, where the successor of a slot receives the edge.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import NotMelonicError
from .invariants import PermTuple
from .melonic import canonical_pairing, is_melonic, melonic_pairing
from .partitions import SetPartition
from .perms import Perm, enumerate_noncrossing, moebius_nc
from .transforms import MomentTable

Slot = tuple[int, int]  # (thick edge index, shade), within one color


@dataclass(frozen=True)
class PairedShape:
    """k_c free index pairs per color; the total is the input count."""

    counts: tuple[int, ...]

    @property
    def D(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def __post_init__(self):
        if self.total < 1:
            raise ValueError("a paired tensor needs at least one index pair")


@dataclass(frozen=True)
class PairedTensor:
    """A paired tensor: either a partial trace of a first-order invariant
    (sigma, cut edges, generator word) or a rescaled identity marker."""

    flavor: str
    sigma: PermTuple | None
    removed: frozenset[tuple[int, int]]  # (color, white vertex)
    word: tuple | None
    identity_shape: PairedShape | None = None

    def __post_init__(self):
        if self.flavor not in ("mixed", "pure"):
            raise ValueError(f"bad flavor {self.flavor!r}")
        if self.is_identity:
            if self.sigma is not None or self.removed:
                raise ValueError("identity markers carry no invariant data")
            return
        s = self.sigma
        if s is None:
            raise ValueError("need an invariant or an identity shape")
        if not self.removed:
            raise ValueError("a generated paired tensor has at least one cut edge")
        for c, w in self.removed:
            if not (0 <= c < s.D and 1 <= w <= s.n):
                raise ValueError(f"cut edge {(c, w)} out of range")
        if self.flavor == "pure":
            if s.K_p != 1 or melonic_pairing(s) != Perm.identity(s.n):
                raise ValueError(
                    "pure paired tensors come from purely connected melonic "
                    "invariants labeled with identity pairing"
                )
        else:
            if s.K_m != 1 or not is_melonic(s.extend(Perm.identity(s.n))):
                raise ValueError(
                    "mixed paired tensors come from connected invariants "
                    "with (sigma, id) melonic"
                )
        if self.word is not None:
            if self.flavor == "mixed" and len(self.word) != s.n:
                raise ValueError("mixed word must label every tensor")
            if self.flavor == "pure" and (
                len(self.word) != 2 or any(len(wp) != s.n for wp in self.word)
            ):
                raise ValueError("pure word must label all whites and blacks")
        # at most one cut per alternating cycle (the generated-set condition)
        eta = self.pairing()
        for c in range(s.D):
            seen: set[int] = set()
            for start in range(1, s.n + 1):
                if start in seen:
                    continue
                cycle = []
                w = start
                while w not in seen:
                    seen.add(w)
                    cycle.append(w)
                    w = eta.inverse()(s.perms[c](w))
                cuts = sum(1 for w in cycle if (c, w) in self.removed)
                if cuts > 1:
                    raise ValueError("more than one cut on an alternating cycle")

    @property
    def is_identity(self) -> bool:
        return self.identity_shape is not None

    @property
    def n_regular(self) -> int:
        return 0 if self.is_identity else self.sigma.n

    @property
    def D(self) -> int:
        return self.identity_shape.D if self.is_identity else self.sigma.D

    def pairing(self) -> Perm:
        if self.is_identity:
            raise ValueError("identity markers have no pairing")
        if self.flavor == "pure":
            return Perm.identity(self.sigma.n)
        return canonical_pairing(self.sigma.extend(Perm.identity(self.sigma.n)))

    def shape(self) -> PairedShape:
        if self.is_identity:
            return self.identity_shape
        counts = [0] * self.D
        for c, _ in self.removed:
            counts[c] += 1
        return PairedShape(tuple(counts))

    def slots_of_color(self, c: int) -> list[int]:
        """White vertices of the color-c cuts, in shade order."""
        if self.is_identity:
            raise ValueError("identity markers have no cut edges")
        return sorted(w for cc, w in self.removed if cc == c)

    def generator(self):
        """The single generator of this element, if the word is constant."""
        if self.is_identity:
            return "1"
        if self.word is None:
            return None
        if self.flavor == "mixed":
            gens = set(self.word)
        else:
            gens = set(zip(self.word[0], self.word[1]))
        if len(gens) != 1:
            raise ValueError("element is not generated by a single tensor")
        return next(iter(gens))


def identity_of(shape: PairedShape, flavor: str) -> PairedTensor:
    return PairedTensor(flavor, None, frozenset(), None, identity_shape=shape)


def single_tensor(flavor: str, D: int, label=None) -> PairedTensor:
    """A regular tensor as a paired tensor: n = 1 with all D edges cut."""
    word = None
    if label is not None:
        word = (label,) if flavor == "mixed" else ((label[0],), (label[1],))
    return PairedTensor(
        flavor,
        PermTuple.identity(1, D),
        frozenset((c, 1) for c in range(D)),
        word,
    )


@dataclass(frozen=True)
class PairedGraph:
    """Thick edges plus, per color, the system of cycles over (edge, shade)
    slots; the successor of a slot receives the colored edge."""

    tensors: tuple[PairedTensor, ...]
    cycles: tuple[tuple[tuple[Slot, ...], ...], ...]  # [color][cycle][entry]

    def __post_init__(self):
        D = self.tensors[0].D if self.tensors else len(self.cycles)
        if any(t.D != D for t in self.tensors):
            raise ValueError("all tensors must have the same color count")
        if len(self.cycles) != D:
            raise ValueError("need one cycle system per color")
        for c in range(D):
            expected = {
                (i, r)
                for i, t in enumerate(self.tensors)
                for r in range(1, t.shape().counts[c] + 1)
            }
            found = [slot for cyc in self.cycles[c] for slot in cyc]
            if sorted(found) != sorted(expected) or len(found) != len(set(found)):
                raise ValueError(f"color {c} cycles do not cover each slot once")

    @property
    def D(self) -> int:
        return len(self.cycles)

    @property
    def q(self) -> int:
        return len(self.tensors)

    @property
    def flavor(self) -> str:
        return self.tensors[0].flavor

    def edges(self) -> list[tuple[int, Slot, Slot]]:
        """(color, from-output slot, to-input slot) for every colored edge."""
        out = []
        for c, system in enumerate(self.cycles):
            for cyc in system:
                for i, slot in enumerate(cyc):
                    out.append((c, slot, cyc[(i + 1) % len(cyc)]))
        return out

    def to_json(self) -> str:
        import json

        def tensor_rec(t: PairedTensor):
            if t.is_identity:
                return {"identity": list(t.identity_shape.counts)}
            rec = {
                "colors": [list(p.images) for p in t.sigma.perms],
                "removed": sorted([c, w] for c, w in t.removed),
            }
            if t.word is not None:
                rec["word"] = (
                    list(t.word)
                    if t.flavor == "mixed"
                    else [list(t.word[0]), list(t.word[1])]
                )
            return rec

        return json.dumps(
            {
                "flavor": self.flavor,
                "thick_edges": [tensor_rec(t) for t in self.tensors],
                "cycles": {
                    str(c): [[list(slot) for slot in cyc] for cyc in system]
                    for c, system in enumerate(self.cycles)
                },
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, blob: str) -> "PairedGraph":
        import json

        data = json.loads(blob)
        flavor = data["flavor"]
        tensors = []
        for rec in data["thick_edges"]:
            if "identity" in rec:
                tensors.append(identity_of(PairedShape(tuple(rec["identity"])), flavor))
                continue
            word = rec.get("word")
            if word is not None and flavor == "pure":
                word = (tuple(word[0]), tuple(word[1]))
            elif word is not None:
                word = tuple(word)
            tensors.append(
                PairedTensor(
                    flavor,
                    PermTuple([Perm(im) for im in rec["colors"]]),
                    frozenset((c, w) for c, w in rec["removed"]),
                    word,
                )
            )
        D = max(int(c) for c in data["cycles"]) + 1
        cycles = tuple(
            tuple(
                tuple(tuple(slot) for slot in cyc) for cyc in data["cycles"][str(c)]
            )
            for c in range(D)
        )
        return cls(tuple(tensors), cycles)


def close_tensor(t: PairedTensor) -> PairedGraph:
    """Tr(P): every slot closed onto itself."""
    counts = t.shape().counts
    cycles = tuple(
        tuple(((0, r),) for r in range(1, counts[c] + 1)) for c in range(len(counts))
    )
    return PairedGraph((t,), cycles)


def trivial_graph(s: PermTuple, flavor: str, word=None) -> PairedGraph:
    """The closed graph of an invariant with one single-tensor thick edge
    per regular tensor.  The slot pairs are then the thick edges, so this
    graph is melonic exactly when the canonical pairing is the identity
    (always true in the pure first-order labeling; in the mixed case use
    canonical_graph instead)."""
    n, D = s.n, s.D
    tensors = []
    for i in range(1, n + 1):
        if word is None:
            label = None
        elif flavor == "mixed":
            label = word[i - 1]
        else:
            label = (word[0][i - 1], word[1][i - 1])
        tensors.append(single_tensor(flavor, D, label))
    cycles = []
    for c in range(D):
        system = []
        for cyc in s.perms[c].cycles():
            system.append(tuple((w - 1, 1) for w in cyc))
        cycles.append(tuple(system))
    return PairedGraph(tuple(tensors), tuple(cycles))


def cycle_word_tensor(flavor: str, D: int, length: int, labels=None) -> PairedTensor:
    """The cycle-form word M_1 (x) ... (x) M_k as a paired tensor: the
    underlying invariant is the rigid k-cycle with every edge cut, so the
    slot pairs chain the inputs of each factor to the outputs of the next."""
    rho = Perm.full_cycle(length)
    sigma = PermTuple.constant(rho, D)
    removed = frozenset((c, w) for c in range(D) for w in range(1, length + 1))
    word = None
    if labels is not None:
        word = tuple(labels) if flavor == "mixed" else (tuple(labels[0]), tuple(labels[1]))
    return PairedTensor(flavor, sigma, removed, word)


def canonical_graph(s: PermTuple, flavor: str, word=None) -> PairedGraph:
    """A melonic paired graph whose trace is Tr_s, for a first-order s.

    Pure flavor: single-tensor thick edges on the labeling normalized to
    identity pairing (so the slot pairs realize the canonical pairs).
    Mixed flavor: one cycle-form word per cycle of the canonical pairing of
    (s, id); the graph keeps every original edge of s.
    """
    if flavor == "pure":
        eta = canonical_pairing(s)
        sp = s.right_mul(eta.inverse())
        wp = word
        if word is not None:
            inv = eta.inverse()
            wp = (
                tuple(word[0][inv(i) - 1] for i in range(1, s.n + 1)),
                tuple(word[1]),
            )
        return trivial_graph(sp, flavor, wp)
    n, D = s.n, s.D
    eta = canonical_pairing(s.extend(Perm.identity(n)))
    tensors = []
    where: dict[int, tuple[int, int]] = {}  # white -> (tensor idx, local label)
    for idx, cyc in enumerate(eta.cycles()):
        ordered = sorted(cyc)
        rank = {w: i + 1 for i, w in enumerate(ordered)}
        # local invariant: the pairing cycle in sorted-label coordinates
        images = [0] * len(cyc)
        for w in cyc:
            images[rank[w] - 1] = rank[eta(w)]
        rho = Perm(images)
        labels = None
        if word is not None:
            labels = tuple(word[w - 1] for w in ordered)
        tensors.append(
            PairedTensor(
                flavor,
                PermTuple.constant(rho, D),
                frozenset((c, w) for c in range(D) for w in range(1, len(cyc) + 1)),
                labels,
            )
        )
        for w in cyc:
            where[w] = (idx, rank[w])
    # the slot of color c freeing the input of local black b is the cut edge
    # (c, rho^{-1}(b)); shades are ordered by the local white label
    cycles = []
    for c in range(D):
        succ: dict[Slot, Slot] = {}
        for w in range(1, n + 1):
            idx_out, loc_out = where[w]
            tgt = s.perms[c](w)
            idx_in, loc_in = where[tgt]
            rho_in = tensors[idx_in].sigma.perms[c]
            succ[(idx_out, loc_out)] = (idx_in, rho_in.inverse()(loc_in))
        system = []
        seen: set[Slot] = set()
        for slot in sorted(succ):
            if slot in seen:
                continue
            cyc = []
            cur = slot
            while cur not in seen:
                seen.add(cur)
                cyc.append(cur)
                cur = succ[cur]
            system.append(tuple(cyc))
        cycles.append(tuple(system))
    return PairedGraph(tuple(tensors), tuple(cycles))


# -- ungrouping ----------------------------------------------------------------


def ungroup(g: PairedGraph) -> tuple[PermTuple, tuple | None]:
    """Merge the graph's edges with each element's internal structure into
    one invariant over all regular tensors; returns (sigma, word).

    The graph is melonic exactly when the result is first order (connected
    with (sigma, id) melonic in the mixed case, purely connected melonic
    with identity pairing in the pure one).
    """
    if any(t.is_identity for t in g.tensors):
        raise ValueError("contract identity markers before ungrouping")
    offsets = []
    total = 0
    for t in g.tensors:
        offsets.append(total)
        total += t.n_regular
    D = g.D
    images = [[0] * total for _ in range(D)]
    for idx, t in enumerate(g.tensors):
        off = offsets[idx]
        slots = {c: t.slots_of_color(c) for c in range(D)}
        for c in range(D):
            cut = set(slots[c])
            for w in range(1, t.sigma.n + 1):
                if w not in cut:
                    images[c][off + w - 1] = off + t.sigma.perms[c](w)
    # graph edges: output slot (c, r) of tensor l feeds the input freed at
    # the successor slot
    for c, slot_out, slot_in in _edge_list(g):
        l_out, r_out = slot_out
        l_in, r_in = slot_in
        t_out, t_in = g.tensors[l_out], g.tensors[l_in]
        w_out = t_out.slots_of_color(c)[r_out - 1]
        w_in = t_in.slots_of_color(c)[r_in - 1]
        images[c][offsets[l_out] + w_out - 1] = offsets[l_in] + t_in.sigma.perms[c](
            w_in
        )
    sigma = PermTuple([Perm(im) for im in images])
    word = _merge_words(g)
    return sigma, word


def _edge_list(g: PairedGraph):
    for c, system in enumerate(g.cycles):
        for cyc in system:
            for i, slot in enumerate(cyc):
                yield c, slot, cyc[(i + 1) % len(cyc)]


def _merge_words(g: PairedGraph):
    if any(t.word is None for t in g.tensors if not t.is_identity):
        return None
    if g.flavor == "mixed":
        out = []
        for t in g.tensors:
            out.extend(t.word)
        return tuple(out)
    whites, blacks = [], []
    for t in g.tensors:
        whites.extend(t.word[0])
        blacks.extend(t.word[1])
    return tuple(whites), tuple(blacks)


# -- melonic recognition on shades ----------------------------------------------


def is_melonic_paired(g: PairedGraph) -> bool:
    """Dipole recursion adapted to shades: repeatedly remove a thick edge
    whose inputs are all summed with their own paired outputs (same color
    and shade) except exactly one pair, whose two half-edges rewire to each
    other; fully self-paired tensors are the base case."""
    succ: dict[tuple[int, Slot], tuple[int, Slot]] = {}
    for c, a, b in _edge_list(g):
        succ[(c, a)] = (c, b)
    alive = set(range(g.q))
    slots = {
        i: [(c, r) for c in range(g.D) for r in range(1, t.shape().counts[c] + 1)]
        for i, t in enumerate(g.tensors)
    }
    while alive:
        removable = None
        for i in alive:
            open_slots = [
                (c, r)
                for c, r in slots[i]
                if succ[(c, (i, r))] != (c, (i, r))
            ]
            if len(open_slots) <= 1:
                removable = (i, open_slots[0] if open_slots else None)
                break
        if removable is None:
            return False
        i, out_slot = removable
        if out_slot is not None:
            c, r = out_slot
            preds = {v: k for k, v in succ.items()}
            src = preds[(c, (i, r))]
            tgt = succ[(c, (i, r))]
            succ[src] = tgt
        for c, r in slots[i]:
            succ.pop((c, (i, r)), None)
        alive.remove(i)
    return True


def contract_identities(g: PairedGraph) -> PairedGraph:
    """Splice identity markers out of every cycle (their slots are
    pass-throughs); cycles that carried only identities disappear."""
    keep = [i for i, t in enumerate(g.tensors) if not t.is_identity]
    if len(keep) == g.q:
        return g
    renum = {old: new for new, old in enumerate(keep)}
    cycles = []
    for system in g.cycles:
        new_system = []
        for cyc in system:
            spliced = tuple(
                (renum[l], r) for l, r in cyc if not g.tensors[l].is_identity
            )
            if spliced:
                new_system.append(spliced)
        cycles.append(tuple(new_system))
    return PairedGraph(tuple(g.tensors[i] for i in keep), tuple(cycles))


def components(g: PairedGraph) -> list[tuple[int, ...]]:
    """Connected components of the thick-edge adjacency through edges."""
    parent = list(range(g.q))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c, a, b in _edge_list(g):
        ra, rb = find(a[0]), find(b[0])
        if ra != rb:
            parent[rb] = ra
    groups: dict[int, list[int]] = {}
    for i in range(g.q):
        groups.setdefault(find(i), []).append(i)
    return [tuple(sorted(v)) for v in sorted(groups.values())]


def subgraph(g: PairedGraph, support: Sequence[int]) -> PairedGraph:
    renum = {old: new for new, old in enumerate(support)}
    cycles = []
    for system in g.cycles:
        new_system = []
        for cyc in system:
            if cyc[0][0] in renum:
                new_system.append(tuple((renum[l], r) for l, r in cyc))
        cycles.append(tuple(new_system))
    return PairedGraph(tuple(g.tensors[i] for i in support), tuple(cycles))


# -- asymptotic moments and cumulants of paired graphs ---------------------------


def phi_paired(g: PairedGraph, phi: MomentTable):
    """phi_g(h) = the asymptotic moment of the ungrouped invariant, the
    product over connected components after contracting identity slots;
    the all-identities graph has phi = 1."""
    g = contract_identities(g)
    if not g.tensors:
        return Fraction(1)
    out = 1
    for comp in components(g):
        sigma, word = ungroup(subgraph(g, comp))
        out = out * phi.value(sigma, word=word if phi.multilabel else None)
    return out


def _cycle_refinements(cyc: tuple[Slot, ...]):
    """(new cycles, Moebius factor) for each non-crossing refinement."""
    k = len(cyc)
    gamma = Perm.full_cycle(k)
    for tau in enumerate_noncrossing(gamma):
        new = tuple(
            tuple(cyc[pos - 1] for pos in orbit) for orbit in tau.cycles()
        )
        yield new, moebius_nc(gamma * tau.inverse())


def refinements(g: PairedGraph) -> Iterable[tuple[PairedGraph, int]]:
    """All h below g in the per-cycle non-crossing product, with M(h, g)."""
    per_cycle = []
    for c, system in enumerate(g.cycles):
        for cyc in system:
            per_cycle.append(list(_cycle_refinements(cyc)))
    sizes = [len(g.cycles[c]) for c in range(g.D)]
    for combo in itertools.product(*per_cycle):
        mob = 1
        flat = []
        for new, m in combo:
            mob *= m
            flat.append(new)
        cycles = []
        idx = 0
        for c in range(g.D):
            system = []
            for _ in range(sizes[c]):
                system.extend(flat[idx])
                idx += 1
            cycles.append(tuple(system))
        yield PairedGraph(g.tensors, tuple(cycles)), mob


def varkappa_paired(g: PairedGraph, phi: MomentTable):
    """Free cumulant of a connected melonic paired graph:
    sum over refinements h of phi_{Pi(h), h} M(h, g)."""
    if len(components(g)) != 1:
        raise ValueError("use the multiplicative extension for disconnected graphs")
    total = 0
    for h, mob in refinements(g):
        total = total + phi_paired(h, phi) * mob
    return total


def varkappa_multiplicative(g: PairedGraph, phi: MomentTable):
    out = 1
    for comp in components(g):
        out = out * varkappa_paired(subgraph(g, comp), phi)
    return out


def phi_from_varkappa(g: PairedGraph, phi: MomentTable):
    """Inverse transform: phi_g = sum over refinements of the products of
    component cumulants (all computed against the same phi table)."""
    total = 0
    for h, _ in refinements(g):
        total = total + varkappa_multiplicative(h, phi)
    return total


# -- grouping --------------------------------------------------------------------


@dataclass(frozen=True)
class GroupResult:
    """Outcome of splitting a set of edges open in a melonic paired graph.

    Components untouched by any cut are completed traces rather than paired
    tensors; they are returned in `closed`, and with no open pieces at all
    (an empty cut on a connected graph) the quotient is trivial (None).
    """

    pieces: tuple[PairedTensor, ...]
    supports: tuple[tuple[int, ...], ...]  # regular-tensor labels per piece
    closure: PermTuple  # tau: the closed graphs of the pieces, globally
    quotient: PairedGraph | None  # k: the graph of the pieces with the cut edges
    piece_partition: SetPartition  # thick edges of g grouped by component
    closed: tuple[PairedGraph, ...] = ()


def _alternating_cycles(sigma: PermTuple, eta: Perm, c: int) -> list[list[int]]:
    out = []
    seen: set[int] = set()
    inv = eta.inverse()
    for start in range(1, sigma.n + 1):
        if start in seen:
            continue
        cyc = []
        w = start
        while w not in seen:
            seen.add(w)
            cyc.append(w)
            w = inv(sigma.perms[c](w))
        out.append(cyc)
    return out


def group(g: PairedGraph, cut: Iterable[tuple[int, Slot]]) -> GroupResult:
    """Split the given edges of a melonic graph open; the connected pieces
    are again paired tensors generated by the same elements, and the
    quotient graph recovers the original trace.

    `cut` lists edges by (color, output slot).  Everything happens at the
    graph level: within each stored cycle, the arcs between consecutive
    cuts close onto themselves (the input freed by one cut reconnects to
    the output freed at the next), which stays inside one piece.
    """
    cut = set(cut)
    if not is_melonic_paired(g):
        raise NotMelonicError("grouping is defined on melonic paired graphs")
    D = g.D
    offsets = []
    total = 0
    for t in g.tensors:
        offsets.append(total)
        total += t.n_regular

    def global_white(c: int, slot: Slot) -> int:
        l, r = slot
        return offsets[l] + g.tensors[l].slots_of_color(c)[r - 1]

    # split every stored cycle at its cuts: uncut cycles survive whole,
    # arcs become closed piece-level cycles with one closure slot each
    piece_level: list[list[tuple[Slot, ...]]] = [[] for _ in range(D)]
    quotient_raw: list[list[list[Slot]]] = [[] for _ in range(D)]
    closure_slots: list[set[Slot]] = [set() for _ in range(D)]
    for c in range(D):
        for cyc in g.cycles[c]:
            cut_positions = [i for i, slot in enumerate(cyc) if (c, slot) in cut]
            if not cut_positions:
                piece_level[c].append(cyc)
                continue
            k = len(cyc)
            for j, p in enumerate(cut_positions):
                prev = cut_positions[j - 1]
                # arc after the previous cut, ending at this cut's output
                arc = [cyc[(prev + i) % k] for i in range(1, (p - prev) % k + 1)]
                if not arc:
                    arc = [cyc[(prev + i) % k] for i in range(1, k + 1)]
                piece_level[c].append(tuple(arc))
                closure_slots[c].add(arc[-1])
            quotient_raw[c].append([cyc[p] for p in cut_positions])

    # components: thick edges atomic, connected through surviving arcs
    parent = list(range(g.q))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for c in range(D):
        for cyc in piece_level[c]:
            for slot in cyc[1:]:
                union(cyc[0][0], slot[0])
    groups: dict[int, list[int]] = {}
    for i in range(g.q):
        groups.setdefault(find(i), []).append(i)
    blocks = [tuple(sorted(v)) for v in sorted(groups.values())]
    comp_of = {i: j for j, blk in enumerate(blocks) for i in blk}

    # assemble one closed subgraph per component; components without any
    # closure slot are completed traces, not paired tensors
    slotted = []
    for j, blk in enumerate(blocks):
        has_slot = any(
            comp_of[slot[0]] == j for c in range(D) for slot in closure_slots[c]
        )
        if has_slot:
            slotted.append(j)
    piece_of = {j: i for i, j in enumerate(slotted)}

    pieces = []
    supports = []
    closed = []
    closure_shade: dict[tuple[int, Slot], int] = {}
    sigma_by_block: dict[int, tuple] = {}
    for j, blk in enumerate(blocks):
        sub = subgraph_from_cycles(g, blk, piece_level)
        sigma_j, word_j = ungroup(sub)
        sigma_by_block[j] = (sigma_j, blk)
        if j not in piece_of:
            closed.append(sub)
            continue
        # removed set: the closure slot of each arc, in piece-local whites
        local_offsets = {}
        run = 0
        for old in blk:
            local_offsets[old] = run
            run += g.tensors[old].n_regular
        removed = set()
        for c in range(D):
            whites = []
            for slot in closure_slots[c]:
                if comp_of[slot[0]] != j:
                    continue
                l, r = slot
                w_local = local_offsets[l] + g.tensors[l].slots_of_color(c)[r - 1]
                whites.append((w_local, slot))
            for shade, (w_local, slot) in enumerate(sorted(whites), start=1):
                removed.add((c, w_local))
                closure_shade[(c, slot)] = shade
        pieces.append(PairedTensor(g.flavor, sigma_j, frozenset(removed), word_j))
        supports.append(
            tuple(
                offsets[old] + w
                for old in blk
                for w in range(1, g.tensors[old].n_regular + 1)
            )
        )

    # the global closure tau: embed each component's invariant by its labels
    images = [[0] * total for _ in range(D)]
    for j, blk in enumerate(blocks):
        sigma_j, _ = sigma_by_block[j]
        sup = tuple(
            offsets[old] + w
            for old in blk
            for w in range(1, g.tensors[old].n_regular + 1)
        )
        for c in range(D):
            for w_local in range(1, sigma_j.n + 1):
                images[c][sup[w_local - 1] - 1] = sup[sigma_j.perms[c](w_local) - 1]
    tau = PermTuple([Perm(im) for im in images])

    # quotient cycles: the cut edges in cyclic order; the output cut at a
    # position is the slot freed by the closure of the arc that ends there
    quotient = None
    if pieces:
        k_cycles: list[list[tuple[Slot, ...]]] = [[] for _ in range(D)]
        for c in range(D):
            for cut_slots in quotient_raw[c]:
                entries = []
                for slot in cut_slots:
                    entries.append(
                        (piece_of[comp_of[slot[0]]], closure_shade[(c, slot)])
                    )
                k_cycles[c].append(tuple(entries))
        quotient = PairedGraph(tuple(pieces), tuple(tuple(s) for s in k_cycles))

    piece_partition = SetPartition(g.q, [tuple(x + 1 for x in blk) for blk in blocks])
    return GroupResult(
        tuple(pieces), tuple(supports), tau, quotient, piece_partition, tuple(closed)
    )


def subgraph_from_cycles(
    g: PairedGraph, block: Sequence[int], systems: list[list[tuple[Slot, ...]]]
) -> PairedGraph:
    """The closed graph on a subset of thick edges with the given cycles."""
    renum = {old: new for new, old in enumerate(block)}
    cycles = []
    for c in range(g.D):
        system = []
        for cyc in systems[c]:
            if cyc[0][0] in renum:
                system.append(tuple((renum[l], r) for l, r in cyc))
        cycles.append(tuple(system))
    return PairedGraph(tuple(g.tensors[i] for i in block), tuple(cycles))


def split_first_order(
    s: PermTuple,
    cut_edges: Iterable[tuple[int, int]],
    flavor: str,
    word=None,
    mode: str = "strict",
):
    """Split edges (color, white vertex) of a first-order invariant open.

    Strict mode requires exactly one cut per alternating cycle of the
    canonical pairing and returns the resulting partial trace as a single
    paired tensor whose free-pair count is n(D-1) + K, with K the number of
    tree components of the cut graph.  Group mode hands any edge set to
    `group` on the canonical melonic graph of s and returns its GroupResult
    (pieces, closure invariant, quotient graph).
    """
    cut_edges = set(cut_edges)
    if mode == "strict":
        ident = Perm.identity(s.n)
        eta = ident if flavor == "pure" else canonical_pairing(s.extend(ident))
        for c in range(s.D):
            for cyc in _alternating_cycles(s, eta, c):
                hits = sum(1 for w in cyc if (c, w) in cut_edges)
                if hits != 1:
                    raise ValueError(
                        "strict mode needs exactly one cut per alternating cycle"
                    )
        return PairedTensor(flavor, s, frozenset(cut_edges), word)
    if mode != "group":
        raise ValueError(f"unknown mode {mode!r}")
    g = canonical_graph(s, flavor, word)
    return group(g, _sigma_edges_to_graph_edges(s, flavor, cut_edges))


def _sigma_edges_to_graph_edges(
    s: PermTuple, flavor: str, cut_edges: Iterable[tuple[int, int]]
) -> set[tuple[int, Slot]]:
    """Map (color, white vertex) edges of s to the output slots of its
    canonical graph (thick edges follow the canonical-pairing cycles in the
    mixed case, single tensors on the pairing-normalized labels in the pure
    one)."""
    if flavor == "pure":
        eta = canonical_pairing(s)
        return {(c, (eta(w) - 1, 1)) for c, w in cut_edges}
    eta = canonical_pairing(s.extend(Perm.identity(s.n)))
    where: dict[int, Slot] = {}
    for idx, cyc in enumerate(eta.cycles()):
        for rank, w in enumerate(sorted(cyc), start=1):
            where[w] = (idx, rank)
    return {(c, where[w]) for c, w in cut_edges}


# -- alternating classification and centering -------------------------------------


def classify_alternating(g: PairedGraph) -> str:
    """"strict" when every cross-thick-edge colored edge joins different
    generators, "almost" when at least one does and at most one joins equal
    generators, "neither" otherwise."""
    if any(t.is_identity for t in g.tensors):
        raise ValueError("classification needs generated tensors only")
    gens = [t.generator() for t in g.tensors]
    if any(x is None for x in gens):
        raise ValueError("every tensor needs a generator word")
    cross_diff = 0
    cross_same = 0
    for c, a, b in _edge_list(g):
        if a[0] == b[0]:
            continue
        if gens[a[0]] != gens[b[0]]:
            cross_diff += 1
        else:
            cross_same += 1
    if g.q > 1 and cross_diff > 0 and cross_same == 0:
        return "strict"
    if cross_diff >= 1 and cross_same <= 1:
        return "almost"
    return "neither"


def phi_of_tensor(t: PairedTensor, phi: MomentTable):
    """phi(h) = phi_{id_1}(h), the moment of the closed single element."""
    if t.is_identity:
        return Fraction(1)
    return phi_paired(close_tensor(t), phi)


def center(t: PairedTensor, phi: MomentTable) -> list[tuple[Fraction, PairedTensor]]:
    """h - phi(h) 1 as a formal combination; centering the identity gives 0."""
    val = phi_of_tensor(t, phi)
    if t.is_identity:
        terms = [(Fraction(1) - val, t)]
    else:
        terms = [(Fraction(1), t), (-val, identity_of(t.shape(), t.flavor))]
    return [(c, x) for c, x in terms if c != 0]


def substitute(g: PairedGraph, replacements: Mapping[int, PairedTensor]) -> PairedGraph:
    tensors = list(g.tensors)
    for i, t in replacements.items():
        if t.shape() != g.tensors[i].shape():
            raise ValueError("replacement must have the same shape")
        tensors[i] = t
    return PairedGraph(tuple(tensors), g.cycles)


def phi_centered(g: PairedGraph, phi: MomentTable):
    """phi_g with every tensor asymptotically centered, by multilinear
    expansion over identity substitutions."""
    values = [phi_of_tensor(t, phi) for t in g.tensors]
    total = 0
    for subset in itertools.product((False, True), repeat=g.q):
        coeff = Fraction(1)
        repl = {}
        for i, flag in enumerate(subset):
            if flag:
                coeff *= -values[i]
                repl[i] = identity_of(g.tensors[i].shape(), g.flavor)
        if coeff == 0:
            continue
        total = total + coeff * phi_paired(substitute(g, repl), phi)
    return total


# -- the freeness checker -----------------------------------------------------------


@dataclass
class FreenessFormulation:
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


@dataclass
class FreenessReport:
    """The three equivalent formulations, where the second and third are
    each the conjunction of two conditions (a cumulant/moment vanishing and
    a paired-graph vanishing)."""

    flavor: str
    formulations: list[FreenessFormulation]

    def verdicts(self) -> tuple[bool, bool, bool]:
        f1, f2a, f2b, f3a, f3b = self.formulations
        return (f1.passed, f2a.passed and f2b.passed, f3a.passed and f3b.passed)

    @property
    def all_agree(self) -> bool:
        return len(set(self.verdicts())) == 1

    @property
    def free(self) -> bool:
        return all(self.verdicts())

    def summary(self) -> str:
        lines = [f"freeness check ({self.flavor}):"]
        for f in self.formulations:
            status = "pass" if f.passed else "FAIL"
            lines.append(f"  [{status}] {f.name}: {f.checked} checks")
            for item in f.failures[:3]:
                lines.append(f"      counterexample: {item}")
        v1, v2, v3 = self.verdicts()
        lines.append(
            f"  formulations (cumulants / paired cumulants / centered moments): "
            f"{v1}/{v2}/{v3} -> {'agree' if self.all_agree else 'DISAGREE'}; "
            f"{'free' if self.free else 'not free'}"
        )
        return "\n".join(lines)


def _pure_words(labels, n):
    for whites in itertools.product(labels, repeat=n):
        for blacks in itertools.product(labels, repeat=n):
            yield whites, blacks


def with_generator_labels(g: PairedGraph, labels: Sequence) -> PairedGraph:
    """Copy of g whose thick edges carry constant generator words."""
    tensors = []
    for t, label in zip(g.tensors, labels):
        if t.is_identity:
            tensors.append(t)
            continue
        n = t.n_regular
        word = (label,) * n if g.flavor == "mixed" else ((label,) * n, (label,) * n)
        tensors.append(PairedTensor(t.flavor, t.sigma, t.removed, word))
    return PairedGraph(tuple(tensors), g.cycles)


def _grouped_catalog(flavor: str, n_max: int, D: int, seed: int = 0):
    """Deterministic sample of grouped paired-graph instances (quotient
    graphs with q >= 2 pieces) drawn from first-order invariants."""
    from .melonic import first_order_classes

    rng = random.Random(seed)
    out = []
    for n in range(2, n_max + 1):
        for cls in first_order_classes(n, D, flavor):
            s = cls.representative
            try:
                g0 = canonical_graph(s, flavor)
            except NotMelonicError:
                continue
            edges = [(c, slot) for c, a, _b in _edge_list(g0) for slot in (a,)]
            picks = set()
            for size in (2, 3, 4):
                for _ in range(3):
                    picks.add(tuple(sorted(rng.sample(edges, min(size, len(edges))))))
            for cut in sorted(picks):
                try:
                    res = group(g0, set(cut))
                except (ValueError, NotMelonicError):
                    continue
                if res.quotient is None or res.quotient.q < 2:
                    continue
                if len(components(res.quotient)) != 1:
                    continue
                out.append((g0, tuple(cut), res))
    return out


def freeness_check(phi: MomentTable, n_max: int, labels=("a", "b")) -> FreenessReport:
    """Evaluate the three equivalent formulations of asymptotic tensor
    freeness on a multilabel first-order moment table and report agreement.

    (1) mixed-word first-order free cumulants vanish;
    (2) canonically mismatched cumulants vanish and paired-graph cumulants
        of cross-generator groupings vanish;
    (3) the same at the level of moments, with centered almost-alternating
        paired moments vanishing.
    """
    if not phi.multilabel:
        raise ValueError("freeness checks need a multilabel table")
    from .melonic import first_order_classes
    from .transforms import (
        asymptotic_cumulant_melonic,
        asymptotic_cumulant_wishart_mixed,
    )

    flavor = phi.flavor
    D = None
    for (key, _w) in phi.entries:
        D = len(key[1])
        break
    if D is None:
        raise ValueError("empty table")

    f1 = FreenessFormulation("mixed-word first-order cumulants vanish")
    f2a = FreenessFormulation("canonically mismatched cumulants vanish")
    f2b = FreenessFormulation("cross-generator paired cumulants vanish")
    f3a = FreenessFormulation("canonically mismatched moments vanish")
    f3b = FreenessFormulation("centered almost-alternating moments vanish")

    for n in range(1, n_max + 1):
        for cls in first_order_classes(n, D, flavor):
            s = cls.representative
            if flavor == "pure":
                eta = canonical_pairing(s)
                for whites, blacks in _pure_words(labels, n):
                    matched = all(
                        blacks[eta(i) - 1] == whites[i - 1] for i in range(1, n + 1)
                    )
                    constant = len(set(whites)) == 1
                    kappa = asymptotic_cumulant_melonic(phi, s, word=(whites, blacks))
                    value = phi.value(s, word=(whites, blacks))
                    # the defining condition quantifies over n >= 1: a lone
                    # mismatched pair (x; x'-bar) is already a mixed cumulant
                    if not (matched and constant):
                        f1.checked += 1
                        if kappa != 0:
                            f1.failures.append((cls.text(), whites, blacks, kappa))
                    if not matched:
                        f2a.checked += 1
                        if kappa != 0:
                            f2a.failures.append((cls.text(), whites, blacks, kappa))
                        f3a.checked += 1
                        if value != 0:
                            f3a.failures.append((cls.text(), whites, blacks, value))
            else:
                eta = canonical_pairing(s.extend(Perm.identity(n)))
                for word in itertools.product(labels, repeat=n):
                    matched = all(word[eta(i) - 1] == word[i - 1] for i in range(1, n + 1))
                    constant = len(set(word)) == 1
                    kappa = asymptotic_cumulant_wishart_mixed(phi, s, word=word)
                    value = phi.value(s, word=word)
                    if n >= 2 and not constant:
                        f1.checked += 1
                        if kappa != 0:
                            f1.failures.append((cls.text(), word, kappa))
                    if not matched and eta != Perm.identity(n):
                        f2a.checked += 1
                        if kappa != 0:
                            f2a.failures.append((cls.text(), word, kappa))
                        f3a.checked += 1
                        if value != 0:
                            f3a.failures.append((cls.text(), word, value))

    # grouped instances: assign a generator per piece, spread to thick edges
    for g0, cut, res in _grouped_catalog(flavor, n_max, D):
        for gens in itertools.product(labels, repeat=res.quotient.q):
            if len(set(gens)) < 2:
                continue
            per_tensor = [None] * g0.q
            for j, block in enumerate(res.piece_partition.blocks):
                for idx in block:
                    per_tensor[idx - 1] = gens[j]
            g1 = with_generator_labels(g0, per_tensor)
            k = group(g1, set(cut)).quotient
            f2b.checked += 1
            kap = varkappa_paired(k, phi)
            if kap != 0:
                f2b.failures.append((cut, gens, kap))
            if classify_alternating(k) in ("strict", "almost"):
                f3b.checked += 1
                val = phi_centered(k, phi)
                if val != 0:
                    f3b.failures.append((cut, gens, val))

    return FreenessReport(flavor, [f1, f2a, f2b, f3a, f3b])
