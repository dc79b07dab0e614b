"""Finite sets whose pairwise distances all land in a target set.

``Z`` is a witness for ``S`` when every positive difference of ``Z`` lies in
``S``. Witness search is clique search in the distance graph on
``[0, vertex_bound)`` (``x ~ y`` iff ``|x - y| in S``).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .natset import CapacityError, HTuple, NatSet, distance_set, ladder_bases, realize, SequenceSpec

__all__ = [
    "ColoringError",
    "DeltaFWitness",
    "PartitionExperiment",
    "is_delta_subset",
    "find_delta_f_witness",
    "ladder_delta_f_check",
    "partition_experiment",
    "first_clique",
    "exhaustive_delta_f_witness",
]


class ColoringError(ValueError):
    pass


@dataclass(frozen=True)
class DeltaFWitness:
    Z: HTuple
    h: int
    S_id: str

    def to_dict(self) -> dict:
        return {"type": "deltaf-witness", "Z": list(self.Z), "h": self.h, "S": self.S_id}


@dataclass(frozen=True)
class PartitionExperiment:
    S: NatSet
    X: HTuple
    coloring: dict[int, int]
    pieces: int
    target: int
    piece: Optional[int] = None
    Y: Optional[HTuple] = None

    @property
    def found(self) -> bool:
        return self.Y is not None

    def to_dict(self) -> dict:
        return {
            "type": "partition",
            "X": list(self.X),
            "coloring": {str(d): c for d, c in sorted(self.coloring.items())},
            "pieces": self.pieces,
            "k": self.target,
            "piece": self.piece,
            "Y": None if self.Y is None else list(self.Y),
        }


def is_delta_subset(Z: HTuple | Sequence[int], S: NatSet) -> bool:
    z = tuple(Z)
    if len(z) > 1 and z[-1] - z[0] >= S.capacity:
        raise CapacityError(
            f"difference {z[-1] - z[0]} is beyond the capacity {S.capacity} of the target set"
        )
    return all((y - x) in S for x, y in itertools.combinations(z, 2))


# --------------------------------------------------------------------------
# clique search over bitmask adjacency


def _greedy_color_bound(P: int, adj: Sequence[int], order: Sequence[int]) -> int:
    """Number of colours used by sequential greedy colouring of ``P``."""
    colours = 0
    uncoloured = P
    while uncoloured:
        colours += 1
        q = uncoloured
        for v in order:
            if q >> v & 1:
                uncoloured &= ~(1 << v)
                q &= ~adj[v] & ~(1 << v)
                if not q:
                    break
    return colours


def first_clique(adj: Sequence[int], h: int) -> Optional[tuple[int, ...]]:
    """Lexicographically least h-clique of the graph on ``range(len(adj))``.

    ``adj[v]`` is the neighbour bitmask of ``v``. Branching runs in increasing
    vertex order so the first clique reached is the least one; the greedy
    colouring bound (vertices taken by descending degree, ties by value) only
    prunes subtrees that cannot reach size ``h``.
    """
    n = len(adj)
    if h < 1:
        raise ValueError("h must be at least 1")
    if h > n:
        return None
    if h == 1:
        return (0,)
    order = sorted(range(n), key=lambda v: (-adj[v].bit_count(), v))
    above = [adj[v] & ~((2 << v) - 1) for v in range(n)]

    def extend(clique: list[int], P: int) -> Optional[tuple[int, ...]]:
        need = h - len(clique)
        if need == 0:
            return tuple(clique)
        if P.bit_count() < need:
            return None
        if need > 1 and _greedy_color_bound(P, adj, order) < need:
            return None
        while P:
            low = P & -P
            v = low.bit_length() - 1
            P ^= low
            if P.bit_count() + 1 < need:
                return None
            clique.append(v)
            hit = extend(clique, P & above[v])
            clique.pop()
            if hit is not None:
                return hit
        return None

    return extend([], (1 << n) - 1)


def _distance_graph(S: NatSet, bound: int) -> list[int]:
    full = (1 << bound) - 1
    sbits = S.bits & ~1
    forward = [(sbits << v) & full for v in range(bound)]
    # reverse bits of S within the window to get the downward neighbours
    width = bound
    rev = 0
    for s in S.elements:
        if 0 < s < width:
            rev |= 1 << (width - 1 - s)
    adj = []
    for v in range(bound):
        down = (rev >> (width - 1 - v)) & ((1 << v) - 1)
        adj.append(forward[v] | down)
    return adj


def find_delta_f_witness(
    S: NatSet, h: int, vertex_bound: int, S_id: str = ""
) -> Optional[DeltaFWitness]:
    """Least ``Z ⊆ [0, vertex_bound)`` with ``|Z| = h`` and distances in ``S``.

    ``None`` only rules out witnesses below ``vertex_bound``.
    """
    if h < 1:
        raise ValueError("h must be at least 1")
    if vertex_bound > S.capacity:
        raise CapacityError(f"vertex_bound {vertex_bound} exceeds capacity {S.capacity}")
    if vertex_bound < h:
        return None
    clique = first_clique(_distance_graph(S, vertex_bound), h)
    if clique is None:
        return None
    return DeltaFWitness(HTuple(clique), h, S_id or repr(S))


def exhaustive_delta_f_witness(S: NatSet, h: int, vertex_bound: int) -> Optional[tuple[int, ...]]:
    """Unpruned scan over all h-subsets in lexicographic order (oracle)."""
    members = set(S.elements)
    for combo in itertools.combinations(range(vertex_bound), h):
        if all(y - x in members for x, y in itertools.combinations(combo, 2)):
            return combo
    return None


def ladder_delta_f_check(levels: int, horizon: int) -> list[DeltaFWitness]:
    """Check every ladder block ``A_n = {a_n * i : i <= n}`` up to ``levels``."""
    if levels < 1:
        raise ValueError("levels must be at least 1")
    bases = ladder_bases(horizon)
    if len(bases) < levels or bases[levels - 1] * levels >= horizon:
        raise CapacityError(f"horizon {horizon} is too small for {levels} ladder levels")
    spec = SequenceSpec("ladder", horizon=horizon)
    A = realize(spec)
    out = []
    for n in range(1, levels + 1):
        a = bases[n - 1]
        block = NatSet.of((a * i for i in range(1, n + 1)), capacity=horizon)
        if not block.issubset(A):
            raise AssertionError(f"block A_{n} is not contained in the ladder set")
        if not distance_set(block).issubset(block):
            raise AssertionError(f"distances of A_{n} leave the block")
        Z = HTuple(block.elements)
        if not is_delta_subset(Z, A):
            raise AssertionError(f"A_{n} is not a witness")
        out.append(DeltaFWitness(Z, n, str(spec)))
    return out


def partition_experiment(
    S: NatSet, X: HTuple, coloring: Mapping[int, int], k: int
) -> PartitionExperiment:
    """Look for ``Y ⊆ X`` with ``|Y| = k`` whose distances share one colour.

    ``coloring`` maps each distance of ``X`` to a piece index ``0..r-1``. The
    lowest piece that admits such a ``Y`` wins, and within it the least ``Y``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    xs = X.entries
    dX = distance_set(NatSet.of(xs))
    if not dX.issubset(S):
        raise ColoringError("distances of X are not contained in S")
    missing = [d for d in dX if d not in coloring]
    if missing:
        raise ColoringError(f"coloring is not defined on distances {missing[:10]}")
    colouring = {int(d): int(coloring[d]) for d in dX}
    if any(c < 0 for c in colouring.values()):
        raise ColoringError("piece indices must be non-negative")
    pieces = max(colouring.values(), default=0) + 1

    n = len(xs)
    result = PartitionExperiment(S, X, colouring, pieces, k)
    if k > n:
        return result
    if k == 1:
        return PartitionExperiment(S, X, colouring, pieces, k, 0, HTuple(xs[:1]))
    for piece in range(pieces):
        adj = [0] * n
        for i, j in itertools.combinations(range(n), 2):
            if colouring[xs[j] - xs[i]] == piece:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
        clique = first_clique(adj, k)
        if clique is not None:
            Y = HTuple(tuple(xs[i] for i in clique))
            return PartitionExperiment(S, X, colouring, pieces, k, piece, Y)
    return result
