"""k-sets and uniform families over the ground set [n].

Sets are stored as integer bitmasks (bit ``i - 1`` stands for element ``i``).
For n <= 64 the pair-scanning routines run vectorised over ``uint64`` arrays;
larger ground sets (up to 1024) fall back to Python integers.

Comparing two masks of equal popcount numerically is exactly the
colexicographic order, which is used as the canonical order throughout.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import UsageError

FAST_N = 64
MAX_N = 1024


def mask_of(elements: Iterable[int]) -> int:
    m = 0
    for e in elements:
        m |= 1 << (e - 1)
    return m


def elements_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def popcount(mask: int) -> int:
    return mask.bit_count()


@dataclass(frozen=True)
class Params:
    """The triple (n, k, t) of a generalized Johnson graph."""

    n: int
    k: int
    t: int

    def __post_init__(self) -> None:
        if min(self.n, self.k, self.t) < 0:
            raise UsageError(f"parameters must be nonnegative, got {self}")
        if not self.t < self.k <= self.n:
            raise UsageError(f"need t < k <= n, got n={self.n} k={self.k} t={self.t}")
        if self.n > MAX_N:
            raise UsageError(f"n={self.n} exceeds the supported maximum {MAX_N}")


@dataclass(frozen=True)
class KSet:
    """A subset of [n], kept as a strictly increasing tuple."""

    elements: tuple[int, ...]
    n: int

    def __post_init__(self) -> None:
        els = tuple(self.elements)
        object.__setattr__(self, "elements", els)
        if not 0 <= self.n <= MAX_N:
            raise UsageError(f"ground set size {self.n} out of range")
        prev = 0
        for e in els:
            if not isinstance(e, (int, np.integer)) or e <= prev or e > self.n:
                raise UsageError(f"{els} is not a strictly increasing subset of [1..{self.n}]")
            prev = e

    @classmethod
    def of(cls, elements: Iterable[int], n: int) -> KSet:
        """Build from any iterable of distinct elements (sorted here)."""
        els = sorted(int(e) for e in elements)
        if len(set(els)) != len(els):
            raise UsageError(f"duplicate elements in {els}")
        return cls(tuple(els), n)

    @classmethod
    def from_mask(cls, mask: int, n: int) -> KSet:
        return cls(elements_of(mask), n)

    @cached_property
    def mask(self) -> int:
        return mask_of(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __contains__(self, e: object) -> bool:
        return e in self.elements

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.elements)) + "}"


class Family:
    """A duplicate-free, ordered collection of k-sets of [n].

    Iteration follows insertion order; equality ignores it.
    """

    __slots__ = ("n", "k", "_masks", "_set", "__weakref__")

    def __init__(self, n: int, k: int, members: Iterable[KSet | Iterable[int]] = ()):
        masks = []
        for m in members:
            if isinstance(m, KSet):
                if m.n != n:
                    raise UsageError(f"member {m} lives over [{m.n}], family over [{n}]")
                masks.append(m.mask)
            else:
                masks.append(KSet.of(m, n).mask)
        self._init(n, k, masks, check=True)

    def _init(self, n: int, k: int, masks: Sequence[int], check: bool) -> None:
        if not 0 <= k <= n <= MAX_N:
            raise UsageError(f"need 0 <= k <= n <= {MAX_N}, got n={n} k={k}")
        self.n = n
        self.k = k
        self._masks = tuple(int(m) for m in masks)
        self._set = frozenset(self._masks)
        if check:
            if len(self._set) != len(self._masks):
                raise UsageError("family contains duplicate members")
            top = 1 << n
            for m in self._masks:
                if m < 0 or m >= top or m.bit_count() != k:
                    raise UsageError(f"mask {m:#x} is not a {k}-subset of [{n}]")

    @classmethod
    def from_masks(cls, n: int, k: int, masks: Iterable[int], *, check: bool = True,
                   dedupe: bool = False) -> Family:
        masks = list(masks)
        if dedupe:
            masks = list(dict.fromkeys(masks))
        fam = cls.__new__(cls)
        fam._init(n, k, masks, check)
        return fam

    @property
    def masks(self) -> tuple[int, ...]:
        return self._masks

    @property
    def members(self) -> tuple[KSet, ...]:
        return tuple(KSet.from_mask(m, self.n) for m in self._masks)

    def mask_array(self) -> np.ndarray:
        """Members as a ``uint64`` array; only valid for n <= 64."""
        if self.n > FAST_N:
            raise UsageError("mask_array needs n <= 64")
        return np.array(self._masks, dtype=np.uint64)

    def __len__(self) -> int:
        return len(self._masks)

    def __iter__(self) -> Iterator[KSet]:
        return (KSet.from_mask(m, self.n) for m in self._masks)

    def __contains__(self, item: object) -> bool:
        if isinstance(item, KSet):
            return item.n == self.n and item.mask in self._set
        if isinstance(item, int):
            return item in self._set
        return False

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Family):
            return NotImplemented
        return self.n == other.n and self.k == other.k and self._set == other._set

    def __hash__(self) -> int:
        return hash((self.n, self.k, self._set))

    def __repr__(self) -> str:
        body = ", ".join(str(KSet.from_mask(m, self.n)) for m in self._masks[:6])
        more = ", ..." if len(self._masks) > 6 else ""
        return f"Family(n={self.n}, k={self.k}, [{body}{more}], size={len(self)})"

    def sorted_colex(self) -> Family:
        return Family.from_masks(self.n, self.k, sorted(self._masks), check=False)

    def union(self, other: Family) -> Family:
        _same_shape(self, other)
        extra = [m for m in other._masks if m not in self._set]
        return Family.from_masks(self.n, self.k, self._masks + tuple(extra), check=False)

    def minus(self, other: Family | Iterable[int]) -> Family:
        drop = other._set if isinstance(other, Family) else frozenset(other)
        return Family.from_masks(self.n, self.k, [m for m in self._masks if m not in drop],
                                 check=False)


def _same_shape(a: Family, b: Family) -> None:
    if a.n != b.n or a.k != b.k:
        raise UsageError(f"families over different shapes: (n={a.n},k={a.k}) vs (n={b.n},k={b.k})")


def as_mask(x: KSet | Iterable[int] | int) -> int:
    if isinstance(x, KSet):
        return x.mask
    if isinstance(x, (int, np.integer)):
        return int(x)
    return mask_of(x)


# -- pair counting ---------------------------------------------------------------

def intersection_size(a: KSet, b: KSet) -> int:
    if a.n != b.n:
        raise UsageError(f"sets over different ground sets [{a.n}] and [{b.n}]")
    return (a.mask & b.mask).bit_count()


def _check_t(k: int, t: int) -> None:
    if not 0 <= t < k:
        raise UsageError(f"need 0 <= t < k, got t={t} k={k}")


def pair_count_masks(masks: Sequence[int], t: int, n: int) -> int:
    """Unordered pairs of ``masks`` whose intersection has exactly t elements."""
    m = len(masks)
    if m < 2:
        return 0
    if n <= FAST_N:
        arr = np.asarray(masks, dtype=np.uint64)
        total = 0
        for i in range(m - 1):
            total += int(np.count_nonzero(np.bitwise_count(arr[i] & arr[i + 1:]) == t))
        return total
    total = 0
    for i in range(m - 1):
        a = masks[i]
        for j in range(i + 1, m):
            if (a & masks[j]).bit_count() == t:
                total += 1
    return total


def cross_count_masks(a: Sequence[int], b: Sequence[int], t: int, n: int) -> int:
    if not a or not b:
        return 0
    if n <= FAST_N:
        bb = np.asarray(b, dtype=np.uint64)
        return sum(int(np.count_nonzero(np.bitwise_count(np.uint64(x) & bb) == t)) for x in a)
    return sum(1 for x in a for y in b if (x & y).bit_count() == t)


def t_degrees(masks: Sequence[int], t: int, n: int) -> list[int]:
    """For each member, the number of other members meeting it in exactly t elements."""
    if n <= FAST_N and masks:
        arr = np.asarray(masks, dtype=np.uint64)
        return [int(np.count_nonzero(np.bitwise_count(np.uint64(x) & arr) == t)) - (x.bit_count() == t)
                for x in masks]
    return [sum(1 for y in masks if y != x and (x & y).bit_count() == t) for x in masks]


def t_pairs(masks: Sequence[int], t: int, n: int) -> list[tuple[int, int]]:
    """Index pairs (i, j), i < j, of members meeting in exactly t elements."""
    out = []
    if n <= FAST_N and len(masks) > 1:
        arr = np.asarray(masks, dtype=np.uint64)
        for i in range(len(masks) - 1):
            hits = np.nonzero(np.bitwise_count(arr[i] & arr[i + 1:]) == t)[0]
            out.extend((i, i + 1 + int(j)) for j in hits)
        return out
    for i, j in combinations(range(len(masks)), 2):
        if (masks[i] & masks[j]).bit_count() == t:
            out.append((i, j))
    return out


def count_t_pairs(f: Family, t: int) -> int:
    """Number of unordered pairs of members meeting in exactly t elements."""
    _check_t(f.k, t)
    return pair_count_masks(f.masks, t, f.n)


def cross_t_pairs(a: Family, b: Family, t: int) -> int:
    """Pairs (A, B) with A in a, B in b and |A & B| = t; a and b must be disjoint."""
    _same_shape(a, b)
    _check_t(a.k, t)
    if a._set & b._set:
        raise UsageError("cross_t_pairs needs disjoint families")
    return cross_count_masks(a.masks, b.masks, t, a.n)


def is_t_avoiding(f: Family, t: int) -> bool:
    return count_t_pairs(f, t) == 0


# -- shadows, stars, links -------------------------------------------------------

def _submasks(mask: int, i: int) -> Iterator[int]:
    bits = [1 << (e - 1) for e in elements_of(mask)]
    for combo in combinations(bits, i):
        yield sum(combo)


def shadow_masks(masks: Iterable[int], i: int) -> set[int]:
    out: set[int] = set()
    for m in masks:
        out.update(_submasks(m, i))
    return out


def shadow(f: Family, i: int) -> Family:
    """The i-shadow: every i-set contained in some member, in colex order."""
    if not 0 <= i <= f.k:
        raise UsageError(f"shadow level {i} outside [0, {f.k}]")
    if i == f.k:
        return f
    return Family.from_masks(f.n, i, sorted(shadow_masks(f.masks, i)), check=False)


def restrict_containing(f: Family, x: KSet | Iterable[int] | int) -> Family:
    """F[X]: the members containing x."""
    xm = as_mask(x)
    return Family.from_masks(f.n, f.k, [m for m in f.masks if m & xm == xm], check=False)


def link(f: Family, x: KSet | Iterable[int] | int) -> Family:
    """F(X): the members containing x, with x removed."""
    xm = as_mask(x)
    size = xm.bit_count()
    if size > f.k:
        return Family.from_masks(f.n, 0, [], check=False)
    return Family.from_masks(f.n, f.k - size, [m ^ xm for m in f.masks if m & xm == xm],
                             check=False)


def degrees(f: Family) -> list[int]:
    """Index v - 1 holds the number of members containing v."""
    deg = [0] * f.n
    for m in f.masks:
        while m:
            low = m & -m
            deg[low.bit_length() - 1] += 1
            m ^= low
    return deg


def max_degree_element(f: Family) -> tuple[int, int]:
    """Element of largest degree and that degree; ties go to the smallest element."""
    if len(f) == 0:
        raise UsageError("max_degree_element of an empty family")
    deg = degrees(f)
    best = max(deg)
    return deg.index(best) + 1, best


def is_s_diverse(f: Family, s: float) -> bool:
    if s <= 0:
        raise UsageError(f"diversity parameter must be positive, got {s}")
    if len(f) == 0:
        raise UsageError("diversity of an empty family is undefined")
    _, d = max_degree_element(f)
    return d * s <= len(f)


# -- enumeration -----------------------------------------------------------------

def all_ksets(n: int, k: int) -> list[int]:
    """All k-subsets of [n] as masks, in colex order."""
    if k < 0 or k > n:
        return []
    out = []
    if k == 0:
        return [0]
    m = (1 << k) - 1
    top = 1 << n
    while m < top:
        out.append(m)
        # Gosper's hack: next integer with the same popcount
        c = m & -m
        r = m + c
        m = (((r ^ m) >> 2) // c) | r
    return out


def lex_key(mask: int) -> tuple[int, ...]:
    return elements_of(mask)


# -- text format -----------------------------------------------------------------

def format_family(f: Family) -> str:
    lines = [f"n={f.n} k={f.k}"]
    lines.extend(" ".join(map(str, elements_of(m))) for m in f.masks)
    return "\n".join(lines) + "\n"


def parse_family(text: str) -> Family:
    """Parse the line format written by ``format_family``.

    ``#`` lines are comments. A blank line is the empty set when k = 0 and is
    skipped otherwise.
    """
    header = None
    sets: list[list[int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if header is None:
            if not line:
                continue
            header = _parse_header(line, lineno)
            continue
        if not line and header[1] != 0:
            continue
        try:
            els = [int(tok) for tok in line.split()]
        except ValueError as exc:
            raise UsageError(f"line {lineno}: not a list of integers: {raw!r}") from exc
        if any(b <= a for a, b in zip(els, els[1:])):
            raise UsageError(f"line {lineno}: elements must be strictly increasing")
        sets.append(els)
    if header is None:
        raise UsageError("missing 'n=<n> k=<k>' header")
    n, k = header
    for els in sets:
        if len(els) != k:
            raise UsageError(f"set {els} does not have k={k} elements")
    return Family(n, k, sets)


def _parse_header(line: str, lineno: int) -> tuple[int, int]:
    fields = dict(tok.split("=", 1) for tok in line.split() if "=" in tok)
    try:
        return int(fields["n"]), int(fields["k"])
    except (KeyError, ValueError) as exc:
        raise UsageError(f"line {lineno}: expected header 'n=<n> k=<k>', got {line!r}") from exc


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_family(f: Family, path: str | os.PathLike) -> None:
    atomic_write_text(path, format_family(f))


def read_family(path: str | os.PathLike) -> Family:
    with open(path, encoding="utf-8") as fh:
        return parse_family(fh.read())
