"""Finite-window proxies for asymptotic growth hypotheses.

None of these functions can decide a limit. Each one evaluates the relevant
ratio on ranks ``1..N`` of realized sequences and returns a three-valued
verdict: ``gate-open`` (the window is consistent with the hypothesis and
clears it by a margin), ``gate-closed`` (the window contradicts it) or
``inconclusive``.

Ranks are 1-based: ``a_1`` is the smallest element of ``A``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .natset import NatSet, SequenceSpec, realize

__all__ = [
    "GATE_OPEN",
    "GATE_CLOSED",
    "INCONCLUSIVE",
    "GateReport",
    "GateError",
    "GROWTH_FUNCTIONS",
    "liminf_gate",
    "corollary_f_gate",
    "thm2_gate",
    "default_k0_list",
]

GATE_OPEN = "gate-open"
GATE_CLOSED = "gate-closed"
INCONCLUSIVE = "inconclusive"

DEFAULT_MARGIN = 0.05
DEFAULT_EPSILON = 0.5
REL_TIE = 1e-12


class GateError(ValueError):
    pass


@dataclass
class GateReport:
    kind: str
    k: int
    h: Optional[int]
    k0_list: list[int]
    N: int
    infima: list[float]
    threshold: Optional[float]
    verdict: str
    argmin: Optional[tuple[int, int]] = None
    series: dict[str, list[float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "type": "gate",
            "kind": self.kind,
            "k": self.k,
            "h": self.h,
            "window": {"k0_list": list(self.k0_list), "N": self.N},
            "infima": [float(x) for x in self.infima],
            "threshold": self.threshold,
            "verdict": self.verdict,
            "argmin": None if self.argmin is None else list(self.argmin),
            "series": {
                name: [x if isinstance(x, int) else float(x) for x in vals]
                for name, vals in self.series.items()
            },
        }

    def rows(self) -> list[dict]:
        """One row per window start, for tabular output."""
        out = []
        for i, k0 in enumerate(self.k0_list):
            row = {"k0": k0, "N": self.N}
            if self.infima:
                row["infimum"] = self.infima[i]
            for name, vals in self.series.items():
                if len(vals) == len(self.k0_list):
                    row[name] = vals[i]
            out.append(row)
        return out


def default_k0_list(N: int) -> list[int]:
    """Window starts ``N/8, N/4, N/2`` (deduplicated, at least 1)."""
    return sorted({max(1, N // 8), max(1, N // 4), max(1, N // 2)})


def _sequence(spec: SequenceSpec | NatSet, N: Optional[int], what: str) -> np.ndarray:
    A = spec if isinstance(spec, NatSet) else realize(spec)
    vals = np.asarray(A.elements, dtype=np.float64)
    if N is not None and len(vals) < N:
        raise GateError(f"{what} has only {len(vals)} elements below its horizon; achievable N = {len(vals)}")
    return vals if N is None else vals[:N]


def _check_window(N: int, k0_list: Sequence[int]) -> list[int]:
    k0s = sorted(set(int(x) for x in k0_list))
    if not k0s or k0s[0] < 1 or k0s[-1] > N:
        raise GateError(f"need N >= max(k0_list) >= 1, got N={N}, k0_list={list(k0_list)}")
    return k0s


_ROW_CHUNK = 256


def _grid_rows(a: np.ndarray, b: np.ndarray, k: int, lo: int, hi: int) -> np.ndarray:
    n = np.arange(lo + 1, hi + 1, dtype=np.float64)
    m_root = np.arange(1, len(b) + 1, dtype=np.float64) ** (1.0 / k)
    return (a[lo:hi, None] + b[None, :]) / (n[:, None] * m_root[None, :])


def _grid_infima(
    a: np.ndarray, b: np.ndarray, k: int, k0s: Sequence[int]
) -> tuple[list[float], list[tuple[int, int]]]:
    """Minimum of the ratio grid over ``n, m >= k0`` for each ``k0``, with the
    lexicographically least minimizing ``(n, m)``; rows are processed in chunks."""
    N = len(a)
    best = [math.inf] * len(k0s)
    for lo in range(0, N, _ROW_CHUNK):
        hi = min(lo + _ROW_CHUNK, N)
        rows = _grid_rows(a, b, k, lo, hi)
        for idx, k0 in enumerate(k0s):
            if hi < k0:
                continue
            start = max(lo, k0 - 1) - lo
            best[idx] = min(best[idx], float(rows[start:, k0 - 1 :].min()))
    argmins: list[Optional[tuple[int, int]]] = [None] * len(k0s)
    for lo in range(0, N, _ROW_CHUNK):
        if all(p is not None for p in argmins):
            break
        hi = min(lo + _ROW_CHUNK, N)
        rows = _grid_rows(a, b, k, lo, hi)
        for idx, k0 in enumerate(k0s):
            if argmins[idx] is not None or hi < k0:
                continue
            start = max(lo, k0 - 1) - lo
            sub = rows[start:, k0 - 1 :]
            hits = np.argwhere(sub <= best[idx] + REL_TIE * abs(best[idx]))
            if len(hits):
                i, j = hits[0]  # row-major order, so the least (n, m) comes first
                argmins[idx] = (int(i) + lo + start + 1, int(j) + k0)
    return best, argmins  # type: ignore[return-value]


def liminf_gate(
    A_spec: SequenceSpec | NatSet,
    B_spec: SequenceSpec | NatSet,
    k: int,
    h: int,
    N: int,
    k0_list: Optional[Sequence[int]] = None,
    margin: float = DEFAULT_MARGIN,
) -> GateReport:
    """Infima of ``(a_n + b_m) / (n * m**(1/k))`` over ``k0 <= n, m <= N``.

    Compared against ``(h - 1) ** (-1/k)``.
    """
    if k < 1 or h < 2:
        raise GateError("need k >= 1 and h >= 2")
    if N < 1:
        raise GateError("N must be at least 1")
    k0s = _check_window(N, k0_list or [1])
    a = _sequence(A_spec, N, "A")
    b = _sequence(B_spec, N, "B")
    infima, argmins = _grid_infima(a, b, k, k0s)
    threshold = (h - 1) ** (-1.0 / k)
    last = infima[-1]
    nondecreasing = all(y >= x * (1 - REL_TIE) for x, y in zip(infima, infima[1:]))
    if last < threshold - margin:
        verdict = GATE_OPEN
    elif nondecreasing and last > threshold + margin:
        verdict = GATE_CLOSED
    else:
        verdict = INCONCLUSIVE
    return GateReport(
        kind="liminf",
        k=k,
        h=h,
        k0_list=k0s,
        N=N,
        infima=infima,
        threshold=threshold,
        verdict=verdict,
        argmin=argmins[-1],
        series={"argmin_n": [p[0] for p in argmins], "argmin_m": [p[1] for p in argmins]},
    )


def _log_squared(x: np.ndarray) -> np.ndarray:
    return np.log(x) ** 2


GROWTH_FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "log2": _log_squared,
    "sqrt": np.sqrt,
    "identity": lambda x: np.asarray(x, dtype=np.float64),
}


def growth_function(name: str) -> Callable[[np.ndarray], np.ndarray]:
    """``log2`` (natural log squared), ``sqrt``, ``identity`` or ``power:<p>``."""
    if name in GROWTH_FUNCTIONS:
        return GROWTH_FUNCTIONS[name]
    if name.startswith("power:"):
        p = float(name.split(":", 1)[1])
        if p <= 0:
            raise GateError("custom power must be positive")
        return lambda x: np.asarray(x, dtype=np.float64) ** p
    raise GateError(f"unknown growth function {name!r}")


def _tail_sups(values: np.ndarray, k0s: Sequence[int]) -> list[float]:
    return [float(values[k0 - 1 :].max()) for k0 in k0s]


def _decay_verdict(
    values: np.ndarray, k0s: Sequence[int], epsilon: float
) -> tuple[bool, bool, list[float]]:
    """(tends-to-zero proxy, clearly-growing proxy, tail sups).

    Tends to zero: the tail sups strictly decrease as the window start moves
    right, and the last one is below ``epsilon`` times the largest value in
    the window. The relative threshold makes the test invariant under
    rescaling the sequence, as the limit statement is.
    """
    sups = _tail_sups(values, k0s)
    peak = float(values.max())
    decreasing = all(y < x for x, y in zip(sups, sups[1:])) if len(sups) > 1 else False
    small = sups[-1] < epsilon * peak
    growing = len(sups) > 1 and sups[-1] >= sups[0] and values[-1] >= sups[0]
    return decreasing and small, growing, sups


def corollary_f_gate(
    A_spec: SequenceSpec | NatSet,
    B_spec: SequenceSpec | NatSet,
    f: str,
    k: int,
    N: int,
    k0_list: Optional[Sequence[int]] = None,
    margin: float = DEFAULT_MARGIN,
    epsilon: float = DEFAULT_EPSILON,
) -> GateReport:
    """Proxies for ``limsup a_n / (n f(n)) < inf`` and ``f(b_n) / n**(1/k) -> 0``.

    The first ratio counts as bounded when its sup over the last window
    segment ``[k0_last, N]`` does not exceed ``(1 + margin)`` times its sup
    over the earlier segment ``[k0_first, k0_last)``.
    """
    if k < 1:
        raise GateError("k must be at least 1")
    k0s = _check_window(N, k0_list or default_k0_list(N))
    fn = growth_function(f)
    a = _sequence(A_spec, N, "A")
    b = _sequence(B_spec, N, "B")
    n = np.arange(1, N + 1, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        fa = fn(n)
        growth = np.where(fa > 0, a / (n * fa), np.nan)
        decay = fn(b) / n ** (1.0 / k)
    growth = np.nan_to_num(growth, nan=0.0, posinf=np.inf)

    first, last = k0s[0], k0s[-1]
    early = float(growth[first - 1 : last - 1].max()) if last > first else float(growth[first - 1])
    late = float(growth[last - 1 :].max())
    bounded = late <= (1 + margin) * early
    unbounded = late > (1 + margin) * early and growth[-1] >= late * (1 - REL_TIE)

    to_zero, decay_growing, decay_sups = _decay_verdict(decay, k0s, epsilon)
    if bounded and to_zero:
        verdict = GATE_OPEN
    elif unbounded or decay_growing:
        verdict = GATE_CLOSED
    else:
        verdict = INCONCLUSIVE
    return GateReport(
        kind="corollary",
        k=k,
        h=None,
        k0_list=k0s,
        N=N,
        infima=[],
        threshold=None,
        verdict=verdict,
        series={
            "growth_tail_sup": _tail_sups(growth, k0s),
            "decay_tail_sup": decay_sups,
        },
    )


def thm2_gate(
    A_spec: SequenceSpec | NatSet,
    k: int,
    N: Optional[int] = None,
    k0_list: Optional[Sequence[int]] = None,
    epsilon: float = DEFAULT_EPSILON,
) -> GateReport:
    """Proxy for ``a_n = o(n**(k/(k-1)))``; ``N`` defaults to every realized element."""
    if k < 2:
        raise GateError("k must be at least 2 (for k = 1 the recurrence set is the distance set)")
    a = _sequence(A_spec, N, "A")
    N = len(a) if N is None else N
    if N < 1:
        raise GateError("A is empty")
    k0s = _check_window(N, k0_list or default_k0_list(N))
    n = np.arange(1, N + 1, dtype=np.float64)
    ratio = a / n ** (k / (k - 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        diagonal = np.where(a > 0, 2 * a / (n * a ** (1.0 / k)), 0.0)

    to_zero, growing, sups = _decay_verdict(ratio, k0s, epsilon)
    if to_zero:
        verdict = GATE_OPEN
    elif growing:
        verdict = GATE_CLOSED
    else:
        verdict = INCONCLUSIVE
    return GateReport(
        kind="thm2",
        k=k,
        h=None,
        k0_list=k0s,
        N=N,
        infima=[],
        threshold=None,
        verdict=verdict,
        series={
            "ratio_tail_sup": sups,
            "diagonal_tail_sup": _tail_sups(diagonal, k0s),
        },
    )
