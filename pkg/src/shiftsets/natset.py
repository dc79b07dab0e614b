"""Finite sets of naturals backed by a Python int used as a bit-vector.

Bit ``x`` of :attr:`NatSet.bits` is set iff ``x`` is a member. Shifting a
set is a left shift, intersecting is ``&``, and cardinality is a popcount,
so every kernel in the package runs word-wise inside CPython's bignum code.
"""
from __future__ import annotations

import itertools
import math
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Optional

import numpy as np

__all__ = [
    "CapacityError",
    "IngestionError",
    "NatSet",
    "HTuple",
    "SequenceSpec",
    "global_horizon",
    "set_global_horizon",
    "realize",
    "read_set_file",
    "write_set_file",
    "shift",
    "intersect_shifts",
    "distance_set",
    "h_tuples",
    "ladder_bases",
]

HORIZON_ENV = "SHIFTSETS_HORIZON"
DEFAULT_HORIZON = 10**6

_horizon_override: Optional[int] = None


class CapacityError(ValueError):
    """A set (or a question about it) does not fit the configured horizon."""


class IngestionError(ValueError):
    """A set file or spec string could not be parsed."""


def global_horizon() -> int:
    if _horizon_override is not None:
        return _horizon_override
    raw = os.environ.get(HORIZON_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise IngestionError(f"{HORIZON_ENV}={raw!r} is not an integer") from None
        if value < 1:
            raise IngestionError(f"{HORIZON_ENV} must be positive, got {value}")
        return value
    return DEFAULT_HORIZON


def set_global_horizon(value: Optional[int]) -> None:
    """Override the horizon cap for this process; ``None`` restores the default."""
    global _horizon_override
    if value is not None and value < 1:
        raise ValueError("horizon must be positive")
    _horizon_override = value


def _bits_to_elements(bits: int) -> tuple[int, ...]:
    if bits == 0:
        return ()
    nbytes = (bits.bit_length() + 7) // 8
    raw = np.frombuffer(bits.to_bytes(nbytes, "little"), dtype=np.uint8)
    idx = np.flatnonzero(np.unpackbits(raw, bitorder="little"))
    return tuple(idx.tolist())


@dataclass(frozen=True)
class NatSet:
    """Immutable finite subset of ``[0, capacity)``."""

    bits: int
    capacity: int
    _elements: Optional[tuple[int, ...]] = field(
        default=None, repr=False, compare=False, hash=False
    )

    def __post_init__(self) -> None:
        if self.capacity < 0:
            raise ValueError("capacity must be non-negative")
        if self.bits < 0:
            raise ValueError("bit-vector must be non-negative")
        if self.capacity > global_horizon():
            raise CapacityError(
                f"capacity {self.capacity} exceeds global horizon {global_horizon()}"
            )
        if self.bits.bit_length() > self.capacity:
            raise CapacityError(
                f"element {self.bits.bit_length() - 1} not below capacity {self.capacity}"
            )

    @classmethod
    def of(cls, elements: Iterable[int], capacity: Optional[int] = None) -> "NatSet":
        """Build from any iterable; capacity defaults to ``max + 1``."""
        bits = 0
        top = -1
        limit = global_horizon() if capacity is None else min(capacity, global_horizon())
        for x in elements:
            x = int(x)
            if x < 0:
                raise ValueError(f"negative element {x}")
            if x >= limit:
                raise CapacityError(f"element {x} not below capacity/horizon {limit}")
            bits |= 1 << x
            if x > top:
                top = x
        if capacity is None:
            capacity = top + 1
        return cls(bits, capacity)

    @classmethod
    def empty(cls, capacity: int = 0) -> "NatSet":
        return cls(0, capacity)

    @classmethod
    def interval(cls, lo: int, hi: int, capacity: Optional[int] = None) -> "NatSet":
        """The set ``[lo, hi)``."""
        lo = max(lo, 0)
        bits = ((1 << hi) - 1) ^ ((1 << lo) - 1) if hi > lo else 0
        return cls(bits, hi if capacity is None else capacity)

    @property
    def elements(self) -> tuple[int, ...]:
        if self._elements is None:
            object.__setattr__(self, "_elements", _bits_to_elements(self.bits))
        return self._elements  # type: ignore[return-value]

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __contains__(self, x: object) -> bool:
        return isinstance(x, int) and 0 <= x < self.capacity and bool(self.bits >> x & 1)

    def __bool__(self) -> bool:
        return self.bits != 0

    def __and__(self, other: "NatSet") -> "NatSet":
        return NatSet(self.bits & other.bits, min(self.capacity, other.capacity))

    def __or__(self, other: "NatSet") -> "NatSet":
        return NatSet(self.bits | other.bits, max(self.capacity, other.capacity))

    def issubset(self, other: "NatSet") -> bool:
        return self.bits & ~other.bits == 0

    def restrict(self, lo: int, hi: int) -> "NatSet":
        """Elements in ``[lo, hi)``, capacity ``min(hi, capacity)``."""
        hi = min(hi, self.capacity)
        if hi <= lo:
            return NatSet(0, max(hi, 0))
        mask = ((1 << hi) - 1) ^ ((1 << max(lo, 0)) - 1)
        return NatSet(self.bits & mask, hi)

    def min(self) -> int:
        if not self.bits:
            raise ValueError("empty set has no minimum")
        return (self.bits & -self.bits).bit_length() - 1

    def max(self) -> int:
        if not self.bits:
            raise ValueError("empty set has no maximum")
        return self.bits.bit_length() - 1

    def smallest(self, count: int) -> tuple[int, ...]:
        """The ``count`` smallest elements, without materializing the rest."""
        out = []
        b = self.bits
        while b and len(out) < count:
            low = b & -b
            out.append(low.bit_length() - 1)
            b ^= low
        return tuple(out)

    def __repr__(self) -> str:
        els = self.elements
        shown = ", ".join(map(str, els[:12])) + (", ..." if len(els) > 12 else "")
        return f"NatSet({{{shown}}}, capacity={self.capacity})"


@dataclass(frozen=True)
class HTuple:
    """Strictly increasing tuple of naturals ``t_1 < ... < t_h``."""

    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        entries = tuple(int(x) for x in self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise ValueError("an HTuple needs at least one entry")
        if entries[0] < 0:
            raise ValueError("entries must be naturals")
        if any(a >= b for a, b in zip(entries, entries[1:])):
            raise ValueError(f"entries not strictly increasing: {entries}")

    @classmethod
    def of(cls, *entries: int) -> "HTuple":
        if len(entries) == 1 and not isinstance(entries[0], int):
            return cls(tuple(entries[0]))
        return cls(tuple(entries))

    @property
    def h(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __lt__(self, other: "HTuple") -> bool:
        return self.entries < other.entries

    def __repr__(self) -> str:
        return "HTuple(" + ",".join(map(str, self.entries)) + ")"


# --------------------------------------------------------------------------
# set primitives


def shift(A: NatSet, t: int) -> NatSet:
    if t < 0:
        raise ValueError("shift amount must be a natural")
    return NatSet(A.bits << t, A.capacity + t)


def intersect_shifts(A: NatSet, T: HTuple) -> NatSet:
    """``(A + t_1) & ... & (A + t_h)``."""
    bits = A.bits << T[0]
    for t in T.entries[1:]:
        if not bits:
            break
        bits &= A.bits << t
    return NatSet(bits, A.capacity + T[0])


def distance_set(A: NatSet) -> NatSet:
    """All positive differences ``a' - a`` with ``a' > a``."""
    bits = A.bits
    out = 0
    for a in A.elements:
        out |= bits >> a
    out &= ~1
    return NatSet(out, max(A.capacity, 1))


def h_tuples(S: NatSet, h: int) -> Iterator[HTuple]:
    """Every h-subset of ``S`` once, lexicographically."""
    if h < 1:
        raise ValueError("h must be at least 1")
    for combo in itertools.combinations(S.elements, h):
        yield HTuple(combo)


# --------------------------------------------------------------------------
# sequence specs

KINDS = ("explicit", "file", "primes", "power", "random", "ladder", "naturals", "odds")

_SPEC_RE = re.compile(r"^(?P<kind>[a-z-]+)(?::(?P<params>[^@]*))?(?:@(?P<horizon>\d+))?$")


@dataclass(frozen=True)
class SequenceSpec:
    """Recipe for a NatSet.

    Textual grammar: ``kind[:params][@horizon]`` where params are
    ``key=value`` pairs separated by commas (``power:c=1,p=6/5@5000``,
    ``random:d=1/2,seed=42@2000``), a comma list for ``explicit:1,2,4``, or a
    path for ``file:sets/a.txt``. ``str(spec)`` produces the canonical form
    and ``SequenceSpec.parse(str(spec)) == spec``.
    """

    kind: str
    horizon: Optional[int] = None
    c: Optional[Fraction] = None
    p: Optional[Fraction] = None
    density: Optional[Fraction] = None
    seed: Optional[int] = None
    values: Optional[tuple[int, ...]] = None
    path: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise IngestionError(f"unknown sequence kind {self.kind!r}")
        if self.horizon is not None and self.horizon < 1:
            raise IngestionError("horizon must be at least 1")
        if self.kind == "power":
            if self.c is None or self.p is None or self.c <= 0 or self.p <= 0:
                raise IngestionError("power spec needs c > 0 and p > 0")
        if self.kind == "random":
            if self.density is None or not (0 < self.density <= 1):
                raise IngestionError("random spec needs density in (0, 1]")
            if self.seed is None or not (0 <= self.seed < 2**64):
                raise IngestionError("random spec needs a 64-bit seed")
        if self.kind == "explicit" and self.values is None:
            raise IngestionError("explicit spec needs values")
        if self.kind == "file" and not self.path:
            raise IngestionError("file spec needs a path")
        if self.kind not in ("explicit", "file") and self.horizon is None:
            raise IngestionError(f"{self.kind} spec needs an @horizon")

    @classmethod
    def parse(cls, text: str) -> "SequenceSpec":
        text = text.strip()
        if text.startswith("file:"):
            body, at, hz = text[5:].rpartition("@")
            if not (at and hz.isdigit()):
                body, hz = text[5:], ""
            return cls("file", horizon=int(hz) if hz else None, path=body)
        m = _SPEC_RE.match(text)
        if not m:
            raise IngestionError(f"malformed sequence spec {text!r}")
        kind = m["kind"]
        params = m["params"] or ""
        horizon = int(m["horizon"]) if m["horizon"] else None
        if kind == "explicit":
            try:
                values = tuple(int(v) for v in params.split(",") if v.strip())
            except ValueError:
                raise IngestionError(f"explicit spec has a non-integer value: {text!r}") from None
            return cls(kind, horizon=horizon, values=values)
        kv: dict[str, str] = {}
        for item in filter(None, (s.strip() for s in params.split(","))):
            key, eq, value = item.partition("=")
            if not eq:
                raise IngestionError(f"expected key=value in {text!r}, got {item!r}")
            kv[key.strip()] = value.strip()
        try:
            if kind == "power":
                return cls(kind, horizon=horizon, c=Fraction(kv.pop("c", "1")), p=Fraction(kv.pop("p")))
            if kind == "random":
                d = kv.pop("d", None) or kv.pop("density")
                return cls(kind, horizon=horizon, density=Fraction(d), seed=int(kv.pop("seed")))
        except (KeyError, ValueError, ZeroDivisionError) as exc:
            raise IngestionError(f"bad parameters in {text!r}: {exc}") from None
        if kv:
            raise IngestionError(f"unexpected parameters {sorted(kv)} in {text!r}")
        return cls(kind, horizon=horizon)

    def __str__(self) -> str:
        hz = f"@{self.horizon}" if self.horizon is not None else ""
        if self.kind == "explicit":
            return "explicit:" + ",".join(map(str, self.values or ())) + hz
        if self.kind == "file":
            return f"file:{self.path}{hz}"
        if self.kind == "power":
            return f"power:c={self.c},p={self.p}{hz}"
        if self.kind == "random":
            return f"random:d={self.density},seed={self.seed}{hz}"
        return f"{self.kind}{hz}"

    def with_horizon(self, horizon: int) -> "SequenceSpec":
        from dataclasses import replace

        return replace(self, horizon=horizon)


def read_set_file(path: str | os.PathLike) -> list[int]:
    """One decimal natural per line, strictly increasing; ``#`` starts a comment."""
    values: list[int] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if not body.isdigit():
                raise IngestionError(f"{path}:{lineno}: not a natural number: {body!r}")
            value = int(body)
            if values and value <= values[-1]:
                raise IngestionError(
                    f"{path}:{lineno}: {value} does not exceed previous value {values[-1]}"
                )
            values.append(value)
    return values


def write_set_file(path: str | os.PathLike, A: Iterable[int], comment: str = "") -> None:
    lines = [f"# {c}" for c in comment.splitlines()] if comment else []
    lines.extend(str(x) for x in A)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _sieve(limit: int) -> np.ndarray:
    if limit < 3:
        return np.array([2] if limit > 2 else [], dtype=np.int64)
    is_p = np.ones(limit, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(limit - 1) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.flatnonzero(is_p)


def _floor_power(c: Fraction, p: Fraction, n: int) -> int:
    """Exact ``floor(c * n**p)`` for rational c, p > 0."""
    a, b = p.numerator, p.denominator
    target = c**b * n**a  # (c n^p)^b, exact
    guess = math.floor(float(c) * float(n) ** float(p))
    v = max(guess, 0)
    while v > 0 and Fraction(v) ** b > target:
        v -= 1
    while Fraction(v + 1) ** b <= target:
        v += 1
    return v


def ladder_bases(limit: int) -> list[int]:
    """Canonical ladder bases ``a_1 = 2, a_{n+1} = a_n * n + 1`` up to ``limit``."""
    bases = []
    a, n = 2, 1
    while a < limit:
        bases.append(a)
        a, n = a * n + 1, n + 1
    return bases


def realize(spec: SequenceSpec, base_dir: str | os.PathLike | None = None) -> NatSet:
    """Materialize ``spec`` as a NatSet of capacity ``spec.horizon``."""
    kind = spec.kind
    horizon = spec.horizon
    if kind in ("explicit", "file"):
        if kind == "explicit":
            values = list(spec.values or ())
            if any(b <= a for a, b in zip(values, values[1:])):
                raise IngestionError(f"explicit values not strictly increasing: {values}")
        else:
            path = Path(spec.path or "")
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            values = read_set_file(path)
        if horizon is None:
            horizon = values[-1] + 1 if values else 1
        return NatSet.of((v for v in values if v < horizon), capacity=horizon)
    assert horizon is not None
    if horizon > global_horizon():
        raise CapacityError(f"horizon {horizon} exceeds global horizon {global_horizon()}")
    if kind == "primes":
        return NatSet.of(_sieve(horizon).tolist(), capacity=horizon)
    if kind == "naturals":
        return NatSet.interval(1, horizon)
    if kind == "odds":
        bits = int("10" * ((horizon + 1) // 2), 2)
        return NatSet(bits & ((1 << horizon) - 1), horizon)
    if kind == "power":
        assert spec.c is not None and spec.p is not None
        out = []
        n = 1
        while True:
            v = _floor_power(spec.c, spec.p, n)
            if v >= horizon:
                break
            out.append(v)
            n += 1
        return NatSet.of(out, capacity=horizon)
    if kind == "random":
        assert spec.density is not None and spec.seed is not None
        rng = np.random.default_rng(spec.seed)
        draws = rng.random(horizon)
        mask = draws < float(spec.density)
        return NatSet.of(np.flatnonzero(mask).tolist(), capacity=horizon)
    if kind == "ladder":
        out = set()
        for n, a in enumerate(ladder_bases(horizon), 1):
            out.update(a * i for i in range(1, n + 1) if a * i < horizon)
        return NatSet.of(sorted(out), capacity=horizon)
    raise IngestionError(f"unknown kind {kind!r}")  # pragma: no cover
