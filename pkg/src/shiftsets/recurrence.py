"""Recurrence sets and certified (h,k)-tuple membership.

A tuple ``t_1 < ... < t_h`` is a member of the (h,k)-recurrence set of ``A``
when the shifted copies ``A + t_i`` share at least ``k`` elements. Every
positive answer carries a :class:`Certificate` listing those common elements
so it can be replayed with nothing but subtraction and set membership.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional

from ._parallel import parallel_map
from .natset import HTuple, NatSet, intersect_shifts

__all__ = [
    "Certificate",
    "SearchLimits",
    "SearchResult",
    "recurrence_count",
    "rk_set",
    "rkh_membership",
    "rkh_search",
    "certificate_check",
]

COMPLETE = "complete"
CAPPED = "result-cap"
EXHAUSTED = "budget-exhausted"


@dataclass(frozen=True)
class Certificate:
    """Witness that ``tuple`` lies in the (h,k)-recurrence set.

    ``witnesses`` are the smallest ``k`` elements of the common intersection;
    ``count`` is its exact size.
    """

    tuple: HTuple
    witnesses: tuple[int, ...]
    k: int
    count: Optional[int] = None

    def to_dict(self) -> dict:
        out = {
            "type": "certificate",
            "tuple": list(self.tuple.entries),
            "witnesses": list(self.witnesses),
            "k": self.k,
        }
        if self.count is not None:
            out["count"] = self.count
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "Certificate":
        return cls(
            HTuple(tuple(obj["tuple"])),
            tuple(int(w) for w in obj["witnesses"]),
            int(obj["k"]),
            None if obj.get("count") is None else int(obj["count"]),
        )

    def to_line(self) -> str:
        """Plain-text record: ``tuple=1,2,3 witnesses=4 k=1 count=1``."""
        parts = [
            "tuple=" + ",".join(map(str, self.tuple)),
            "witnesses=" + ",".join(map(str, self.witnesses)),
            f"k={self.k}",
        ]
        if self.count is not None:
            parts.append(f"count={self.count}")
        return " ".join(parts)

    @classmethod
    def from_line(cls, line: str) -> "Certificate":
        line = line.strip()
        if line.startswith("{"):
            return cls.from_dict(json.loads(line))
        fields = dict(part.split("=", 1) for part in line.split())
        ints = lambda s: tuple(int(x) for x in s.split(",") if x)  # noqa: E731
        return cls(
            HTuple(ints(fields["tuple"])),
            ints(fields.get("witnesses", "")),
            int(fields["k"]),
            int(fields["count"]) if "count" in fields else None,
        )


@dataclass(frozen=True)
class SearchLimits:
    tuple_budget: int = 10**7
    result_cap: int = 1000
    b_horizon: Optional[int] = None

    def __post_init__(self) -> None:
        if self.tuple_budget < 1 or self.result_cap < 1:
            raise ValueError("search limits must be positive")
        if self.b_horizon is not None and self.b_horizon < 1:
            raise ValueError("b_horizon must be positive")


@dataclass(frozen=True)
class SearchResult:
    certificates: list[Certificate]
    status: str
    examined: int

    @property
    def exhausted(self) -> bool:
        return self.status == EXHAUSTED

    def __len__(self) -> int:
        return len(self.certificates)

    def __iter__(self):
        return iter(self.certificates)


def _check_k(k: int) -> None:
    if k < 1:
        raise ValueError("k must be at least 1")


def recurrence_count(A: NatSet, x: int) -> int:
    """``|A & (A + x)|``."""
    if x < 0:
        raise ValueError("x must be a natural")
    return (A.bits & (A.bits << x)).bit_count()


def rk_set(A: NatSet, k: int, bound: int) -> NatSet:
    """Shifts ``x`` in ``[1, bound)`` with ``|A & (A + x)| >= k``."""
    _check_k(k)
    bits = A.bits
    if len(A) < k or bound <= 1:
        return NatSet(0, max(bound, 0))
    top = min(bound, A.max() + 1)
    out = 0
    for x in range(1, top):
        if (bits & (bits >> x)).bit_count() >= k:
            out |= 1 << x
    return NatSet(out, bound)


def rkh_membership(A: NatSet, k: int, T: HTuple) -> Optional[Certificate]:
    _check_k(k)
    common = intersect_shifts(A, T)
    size = len(common)
    if size < k:
        return None
    return Certificate(T, common.smallest(k), k, size)


def certificate_check(A: NatSet, c: Certificate) -> bool:
    """Replay ``c`` against ``A`` using plain membership tests."""
    w = c.witnesses
    if c.k < 1 or len(w) < c.k:
        return False
    if any(a >= b for a, b in zip(w, w[1:])):
        return False
    members = set(A.elements)
    for xi in w:
        for t in c.tuple:
            if xi - t not in members:
                return False
    if c.count is not None:
        common = None
        for t in c.tuple:
            shifted = {a + t for a in members}
            common = shifted if common is None else common & shifted
        if len(common or ()) != c.count:
            return False
    return True


# --------------------------------------------------------------------------
# pruned search


def _explore_root(args) -> tuple[list[tuple[int, Certificate]], int, bool]:
    """Depth-first search of all tuples whose first entry is ``elems[root]``.

    Returns ``(certs, nodes, stopped)`` where each cert is tagged with the node
    ordinal (1-based within this subtree) at which it was found. The search
    stops once ``nodes`` would exceed ``budget`` or ``cap`` certificates exist.
    """
    abits, elems, k, h, root, budget, cap = args
    found: list[tuple[int, Certificate]] = []
    nodes = 0
    n = len(elems)

    class _Stop(Exception):
        pass

    def visit(prefix: list[int], inter: int, start: int) -> None:
        nonlocal nodes
        need = h - len(prefix)
        for j in range(start, n - need + 1):
            nodes += 1
            if nodes > budget:
                raise _Stop
            t = elems[j]
            nxt = inter & (abits << t)
            size = nxt.bit_count()
            if size < k:
                continue
            if need == 1:
                witnesses = []
                b = nxt
                while len(witnesses) < k:
                    low = b & -b
                    witnesses.append(low.bit_length() - 1)
                    b ^= low
                found.append(
                    (nodes, Certificate(HTuple(tuple(prefix) + (t,)), tuple(witnesses), k, size))
                )
                if len(found) >= cap:
                    raise _Stop
            else:
                prefix.append(t)
                visit(prefix, nxt, j + 1)
                prefix.pop()

    try:
        nodes += 1
        if nodes > budget:
            raise _Stop
        t0 = elems[root]
        start_bits = abits << t0
        if start_bits.bit_count() >= k:
            visit([t0], start_bits, root + 1)
    except _Stop:
        return found, nodes, True
    return found, nodes, False


def rkh_search(
    A: NatSet,
    B: NatSet,
    k: int,
    h: int,
    limits: SearchLimits = SearchLimits(),
    workers: int = 1,
) -> SearchResult:
    """Find h-subsets of ``B`` in the (h,k)-recurrence set of ``A``.

    Tuples are visited lexicographically; a prefix is abandoned as soon as its
    running intersection drops below ``k`` elements. The budget counts visited
    prefixes of every length. With ``workers > 1`` the first entry is farmed
    out and the partial results are merged to reproduce the sequential run
    exactly.
    """
    _check_k(k)
    if h < 2:
        raise ValueError("h must be at least 2")
    if limits.b_horizon is not None:
        B = B.restrict(0, limits.b_horizon)
    elems = B.elements
    roots = range(max(len(elems) - h + 1, 0))
    if not roots:
        return SearchResult([], COMPLETE, 0)

    budget, cap = limits.tuple_budget, limits.result_cap
    certs: list[Certificate] = []
    examined = 0

    if workers <= 1:
        for root in roots:
            found, nodes, stopped = _explore_root(
                (A.bits, elems, k, h, root, budget - examined, cap - len(certs))
            )
            certs.extend(c for _, c in found)
            if len(certs) >= cap:
                return SearchResult(certs, CAPPED, examined + found[-1][0])
            if stopped:
                return SearchResult(certs, EXHAUSTED, budget)
            examined += nodes
        return SearchResult(certs, COMPLETE, examined)

    jobs = [(A.bits, elems, k, h, root, budget, cap) for root in roots]
    for found, nodes, stopped in parallel_map(_explore_root, jobs, workers):
        remaining = budget - examined
        for ordinal, c in found:
            if ordinal > remaining:
                break
            certs.append(c)
            if len(certs) >= cap:
                return SearchResult(certs, CAPPED, examined + ordinal)
        if nodes > remaining:
            return SearchResult(certs, EXHAUSTED, budget)
        if stopped:  # pragma: no cover - cap inside a subtree implies cap overall
            return SearchResult(certs, CAPPED, examined + nodes)
        examined += nodes
    return SearchResult(certs, COMPLETE, examined)


def brute_force_search(A: NatSet, B: NatSet, k: int, h: int) -> list[HTuple]:
    """Unpruned enumeration by plain Python sets; the oracle for ``rkh_search``."""
    import itertools

    shifted = {t: frozenset(a + t for a in A.elements) for t in B.elements}
    out = []
    for combo in itertools.combinations(B.elements, h):
        common = shifted[combo[0]]
        for t in combo[1:]:
            common = common & shifted[t]
        if len(common) >= k:
            out.append(HTuple(combo))
    return out


def load_certificates(lines: Iterable[str]) -> list[Certificate]:
    out = []
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("{"):
            obj = json.loads(line)
            if obj.get("type", "certificate") != "certificate":
                continue
            out.append(Certificate.from_dict(obj))
        else:
            out.append(Certificate.from_line(line))
    return out
