"""Pigeonhole extraction of a large common-intersection subset of ``B``.

For finite ``A`` (``n`` elements, largest ``a_n``) and ``B`` (``m`` elements,
largest ``b_m``) every shifted copy ``A + b_i`` lies in ``[1, s]`` with
``s = a_n + b_m``. Counting, for each k-subset ``H``, the number of copies
containing it and taking the most popular ``H0`` yields ``Z ⊆ B`` with

    |Z| >= m * C(n, k) / C(s, k) = L * (n * m**(1/k) / s)**k,
    L = prod_{i=1}^{k-1} (1 - i/n) / (1 - i/s).

Only subsets that actually occur are counted; the full ``[1, s]`` k-subset
space is never scanned.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from ._parallel import parallel_map
from .natset import HTuple, NatSet

__all__ = ["LemmaReport", "lemma_bound", "lemma_extract", "COUNTER_CAP"]

COUNTER_CAP = 10**8


def _fraction_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class LemmaReport:
    n: int
    m: int
    k: int
    a_max: int
    b_max: int
    H0: HTuple
    Gamma: tuple[int, ...]
    Z: NatSet
    intersection: NatSet
    exact_bound: Fraction
    L: float
    root_bound: float

    @property
    def f_max(self) -> int:
        return len(self.Gamma)

    def bound_holds(self) -> bool:
        return len(self.Z) >= self.exact_bound

    def forms_agree(self, rel: float = 1e-9) -> bool:
        exact = float(self.exact_bound)
        return abs(self.root_bound - exact) <= rel * max(1.0, exact)

    def to_dict(self) -> dict:
        return {
            "type": "lemma",
            "n": self.n,
            "m": self.m,
            "k": self.k,
            "a_max": self.a_max,
            "b_max": self.b_max,
            "H0": list(self.H0),
            "Gamma": list(self.Gamma),
            "Z": list(self.Z),
            "intersection": list(self.intersection),
            "exact_bound": _fraction_str(self.exact_bound),
            "L": self.L,
            "root_bound": self.root_bound,
        }


def lemma_bound(n: int, m: int, k: int, s: int) -> tuple[Fraction, float, float]:
    """Return ``(exact, L, root_form)`` for the pigeonhole bound."""
    if not (s >= n >= k >= 1 and m >= 1):
        raise ValueError(f"need s >= n >= k >= 1 and m >= 1, got n={n} m={m} k={k} s={s}")
    exact = Fraction(m * math.comb(n, k), math.comb(s, k))
    L = 1.0
    for i in range(1, k):
        L *= (1 - i / n) / (1 - i / s)
    root_form = L * (n * m ** (1 / k) / s) ** k
    return exact, L, root_form


def _k_subset_masks(elements: tuple[int, ...], k: int) -> list[int]:
    masks = []
    for combo in itertools.combinations(elements, k):
        mask = 0
        for a in combo:
            mask |= 1 << a
        masks.append(mask)
    return masks


def _count_shard(args) -> Counter:
    masks, shifts = args
    table: Counter = Counter()
    for b in shifts:
        table.update([mask << b for mask in masks])
    return table


def _mask_entries(mask: int) -> tuple[int, ...]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def lemma_extract(A: NatSet, B: NatSet, k: int, workers: int = 1) -> LemmaReport:
    """Run the counting argument on ``A``, ``B`` and return the full trace.

    ``A`` and ``B`` must not both contain 0: the shifted copies then fit in
    ``[1, a_n + b_m]``, which is what the bound counts against.
    """
    n, m = len(A), len(B)
    if k < 1:
        raise ValueError("k must be at least 1")
    if n < k:
        raise ValueError(f"|A| = {n} < k = {k}: the bound is vacuous")
    if m < 1:
        raise ValueError("B must be non-empty")
    if A.min() + B.min() < 1:
        raise ValueError("A and B both contain 0; shifted copies leave [1, a_n + b_m]")
    if math.comb(n, k) * m > COUNTER_CAP:
        raise ValueError(f"m * C(n, k) = {math.comb(n, k) * m} exceeds {COUNTER_CAP}")

    a_max, b_max = A.max(), B.max()
    bs = B.elements
    masks = _k_subset_masks(A.elements, k)
    if workers <= 1:
        table = _count_shard((masks, bs))
    else:
        shards = [(masks, bs[i::workers]) for i in range(workers)]
        table = Counter()
        for part in parallel_map(_count_shard, shards, workers):
            table.update(part)

    best = max(table.values())
    H0 = min(_mask_entries(h) for h, c in table.items() if c == best)
    h0_mask = 0
    for x in H0:
        h0_mask |= 1 << x
    A_bits = A.bits
    gamma = tuple(i for i, b in enumerate(bs, 1) if (A_bits << b) & h0_mask == h0_mask)
    Z = NatSet.of((bs[i - 1] for i in gamma), capacity=B.capacity)
    inter = -1
    for z in Z:
        inter &= A_bits << z
    intersection = NatSet(inter, A.capacity + Z.min())

    exact, L, root = lemma_bound(n, m, k, a_max + b_max)
    return LemmaReport(
        n=n,
        m=m,
        k=k,
        a_max=a_max,
        b_max=b_max,
        H0=HTuple(H0),
        Gamma=gamma,
        Z=Z,
        intersection=intersection,
        exact_bound=exact,
        L=L,
        root_bound=root,
    )
