"""Discrete group models: exact group law, word metric and ball enumeration.

Elements are plain hashable normal forms:

* ``Z1``/``Z2``/``Z3``: integer tuples,
* ``H3``: integer triples ``(p, q, r)`` for the unitriangular matrix
  ``[[1, p, r], [0, 1, q], [0, 0, 1]]``,
* ``F2``: reduced words over ``"aAbB"`` (capital letter = inverse),
* ``BS12``: triples ``(k, num, exp)`` for the affine map ``x -> 2**k x + num / 2**exp``
  with ``exp >= 0`` and ``num`` odd whenever ``exp > 0``.

Every model also has a vectorised "code" layout (an ``(n, width)`` int64
array) used by the array kernels; see :meth:`GroupModel.encode`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Hashable, Iterable, Sequence

import numpy as np

from .errors import BudgetError, GroupError, HorizonError

Element = Hashable

DEFAULT_HORIZON = 16
DEFAULT_BALL_CAP = 1_000_000


class GroupModel:
    """Base class. Subclasses supply the element law and the code layout."""

    name: str = ""
    identity: Element
    generators: tuple

    def __init__(self, horizon: int = DEFAULT_HORIZON, ball_cap: int = DEFAULT_BALL_CAP):
        self.horizon = horizon
        self.ball_cap = ball_cap
        self._spheres: list[list] = [[self.identity]]
        self._length: dict = {self.identity: 0}
        self._count = 1
        self._balls: dict[int, Ball] = {}

    def __repr__(self) -> str:
        return f"<group {self.name}>"

    # -- element law -----------------------------------------------------
    def coerce(self, g: Any) -> Element:
        """Return the normal form of ``g`` or raise GroupError."""
        raise NotImplementedError

    def _mul(self, g, h):
        raise NotImplementedError

    def _inv(self, g):
        raise NotImplementedError

    def multiply(self, g, h) -> Element:
        return self._mul(self.coerce(g), self.coerce(h))

    def invert(self, g) -> Element:
        return self._inv(self.coerce(g))

    def modular_function(self, g) -> float:
        # discrete groups are unimodular
        return 1.0

    def sort_key(self, g):
        return g

    # -- literals --------------------------------------------------------
    def to_literal(self, g) -> Any:
        return list(g)

    def from_literal(self, obj: Any) -> Element:
        return self.coerce(obj)

    # -- metric ----------------------------------------------------------
    def word_length(self, g) -> int:
        g = self.coerce(g)
        return self._word_length(g)

    def _word_length(self, g) -> int:
        found = self._length.get(g)
        while found is None:
            r = len(self._spheres)
            if r > self.horizon:
                raise HorizonError(f"{self.name}: {g!r} not within word length {self.horizon}")
            self._grow_to(r)
            found = self._length.get(g)
        return found

    def support_radius(self, elements: Iterable) -> int:
        return max((self._word_length(g) for g in elements), default=0)

    def _grow_to(self, radius: int) -> None:
        while len(self._spheres) <= radius:
            r = len(self._spheres)
            seen = self._length
            new = []
            for g in self._spheres[-1]:
                for s in self.generators:
                    h = self._mul(g, s)
                    if h not in seen:
                        seen[h] = r
                        new.append(h)
            if self._count + len(new) > self.ball_cap:
                for h in new:
                    del seen[h]
                raise BudgetError(f"{self.name}: ball({r}) exceeds cap of {self.ball_cap} elements")
            new.sort(key=self.sort_key)
            self._spheres.append(new)
            self._count += len(new)

    def sphere_sizes(self, radius: int) -> list[int]:
        self._grow_to(radius)
        return [len(s) for s in self._spheres[: radius + 1]]

    def ball(self, radius: int) -> "Ball":
        if radius < 0:
            raise ValueError("radius must be >= 0")
        cached = self._balls.get(radius)
        if cached is None:
            self._grow_to(radius)
            elements = tuple(g for s in self._spheres[: radius + 1] for g in s)
            cached = Ball(self, radius, elements)
            self._balls[radius] = cached
        return cached

    # -- vectorised codes ------------------------------------------------
    def encode(self, elements: Sequence) -> np.ndarray:
        return np.array([tuple(g) for g in elements], dtype=np.int64).reshape(len(elements), self.width)

    def decode(self, codes: np.ndarray) -> list:
        return [tuple(row) for row in np.asarray(codes).tolist()]

    def multiply_codes(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def compact_codes(self, codes: np.ndarray) -> np.ndarray:
        return codes

    def invert_codes(self, a: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def random_element(self, rng: np.random.Generator, radius: int):
        """Uniform element of ball(radius)."""
        b = self.ball(radius)
        return b.elements[int(rng.integers(len(b)))]


@dataclass(frozen=True, eq=False)
class Ball:
    """Elements of word length <= radius in (length, normal form) order.

    Since the order is by length first, ``ball(r).elements[:len(ball(s))]``
    is ``ball(s)`` for every ``s <= r``.
    """

    group: GroupModel
    radius: int
    elements: tuple
    index: dict = field(init=False, repr=False)
    codes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {g: i for i, g in enumerate(self.elements)})
        codes = self.group.encode(self.elements)
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "_packer", _RowPacker(codes))

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, g) -> bool:
        return g in self.index

    def core_size(self, core_radius: int) -> int:
        """Number of leading elements forming ball(core_radius)."""
        if core_radius > self.radius:
            raise ValueError(f"core radius {core_radius} exceeds ball radius {self.radius}")
        return len(self.group.ball(core_radius))

    def positions(self, codes: np.ndarray) -> np.ndarray:
        """Ball index of each code row, -1 where the element lies outside."""
        return self._packer.lookup(codes)


class _RowPacker:
    """Exact int64 row lookup by mixed-radix packing within the observed ranges."""

    def __init__(self, codes: np.ndarray):
        self.width = codes.shape[1]
        if codes.shape[0] == 0:
            self.lo = np.zeros(self.width, dtype=np.int64)
            self.hi = self.lo.copy()
        else:
            self.lo = codes.min(axis=0)
            self.hi = codes.max(axis=0)
        spans = [int(h - l + 1) for l, h in zip(self.lo, self.hi)]
        total = 1
        for s in spans:
            total *= s
        self.dict_mode = total >= 2**62
        if self.dict_mode:
            self.table = {tuple(r): i for i, r in enumerate(codes.tolist())}
            return
        strides = np.ones(self.width, dtype=np.int64)
        for j in range(self.width - 2, -1, -1):
            strides[j] = strides[j + 1] * spans[j + 1]
        self.strides = strides
        keys = ((codes - self.lo) * strides).sum(axis=1) if self.width else np.zeros(len(codes), np.int64)
        self.order = np.argsort(keys, kind="stable")
        self.sorted_keys = keys[self.order]

    def _align(self, codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        codes = np.asarray(codes, dtype=np.int64)
        n, w = codes.shape
        ok = np.ones(n, dtype=bool)
        if w > self.width:
            ok &= ~(codes[:, self.width:] != 0).any(axis=1)
            codes = codes[:, : self.width]
        elif w < self.width:
            codes = np.concatenate([codes, np.zeros((n, self.width - w), dtype=np.int64)], axis=1)
        return codes, ok

    def lookup(self, codes: np.ndarray) -> np.ndarray:
        codes, ok = self._align(codes)
        if self.dict_mode:
            out = np.array([self.table.get(tuple(r), -1) for r in codes.tolist()], dtype=np.int64)
            out[~ok] = -1
            return out
        ok &= ((codes >= self.lo) & (codes <= self.hi)).all(axis=1)
        out = np.full(codes.shape[0], -1, dtype=np.int64)
        if not ok.any() or self.sorted_keys.size == 0:
            return out
        keys = ((codes[ok] - self.lo) * self.strides).sum(axis=1)
        pos = np.searchsorted(self.sorted_keys, keys)
        pos = np.minimum(pos, self.sorted_keys.size - 1)
        hit = self.sorted_keys[pos] == keys
        found = np.where(hit, self.order[pos], -1)
        out[ok] = found
        return out


# ---------------------------------------------------------------------------
# Z^d
# ---------------------------------------------------------------------------


class IntegerLattice(GroupModel):
    def __init__(self, dim: int, **kw):
        if dim < 1:
            raise GroupError("dimension must be >= 1")
        self.dim = dim
        self.width = dim
        self.name = f"Z{dim}"
        self.identity = (0,) * dim
        gens = []
        for i in range(dim):
            for sign in (1, -1):
                e = [0] * dim
                e[i] = sign
                gens.append(tuple(e))
        self.generators = tuple(gens)
        super().__init__(**kw)

    def coerce(self, g):
        if isinstance(g, (int, np.integer)) and self.dim == 1:
            return (int(g),)
        if isinstance(g, str):
            raise GroupError(f"{self.name}: not an element: {g!r}")
        try:
            t = tuple(int(x) for x in g)
        except TypeError as exc:
            raise GroupError(f"{self.name}: not an element: {g!r}") from exc
        if len(t) != self.dim or any(not float(x).is_integer() for x in g):
            raise GroupError(f"{self.name}: not an element: {g!r}")
        return t

    def _mul(self, g, h):
        return tuple(a + b for a, b in zip(g, h))

    def _inv(self, g):
        return tuple(-a for a in g)

    def _word_length(self, g) -> int:
        return sum(abs(a) for a in g)

    def multiply_codes(self, a, b):
        return a + b

    def invert_codes(self, a):
        return -a


# ---------------------------------------------------------------------------
# discrete Heisenberg group
# ---------------------------------------------------------------------------


class Heisenberg(GroupModel):
    name = "H3"
    width = 3
    identity = (0, 0, 0)
    generators = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0))

    def coerce(self, g):
        if isinstance(g, str):
            raise GroupError(f"H3: not an element: {g!r}")
        try:
            t = tuple(int(x) for x in g)
        except TypeError as exc:
            raise GroupError(f"H3: not an element: {g!r}") from exc
        if len(t) != 3:
            raise GroupError(f"H3: not an element: {g!r}")
        return t

    def _mul(self, g, h):
        p, q, r = g
        p2, q2, r2 = h
        return (p + p2, q + q2, r + r2 + p * q2)

    def _inv(self, g):
        p, q, r = g
        return (-p, -q, p * q - r)

    def multiply_codes(self, a, b):
        out = a + b
        out[:, 2] += a[:, 0] * b[:, 1]
        return out

    def invert_codes(self, a):
        out = -a
        out[:, 2] += a[:, 0] * a[:, 1]
        return out


# ---------------------------------------------------------------------------
# free group on two generators
# ---------------------------------------------------------------------------

_F2_LETTERS = "aAbB"
_F2_INV = str.maketrans("aAbB", "AaBb")
_F2_CODE = {c: i + 1 for i, c in enumerate(_F2_LETTERS)}
_F2_CHARS = np.array(list("\0" + _F2_LETTERS))


def _inv_letter_codes(x: np.ndarray) -> np.ndarray:
    # a=1 <-> A=2, b=3 <-> B=4; 0 is padding
    return np.where(x > 0, x - 1 + 2 * (x % 2), 0)


class FreeGroup2(GroupModel):
    name = "F2"
    identity = ""
    generators = ("a", "A", "b", "B")
    width = None  # variable; codes are zero padded

    def coerce(self, g):
        if not isinstance(g, str) or any(c not in _F2_CODE for c in g):
            raise GroupError(f"F2: not a word over 'aAbB': {g!r}")
        for x, y in zip(g, g[1:]):
            if x.translate(_F2_INV) == y:
                raise GroupError(f"F2: word {g!r} is not reduced")
        return g

    @staticmethod
    def reduce(word: str) -> str:
        out: list[str] = []
        for c in word:
            if c not in _F2_CODE:
                raise GroupError(f"F2: not a word over 'aAbB': {word!r}")
            if out and out[-1] == c.translate(_F2_INV):
                out.pop()
            else:
                out.append(c)
        return "".join(out)

    def from_literal(self, obj):
        if not isinstance(obj, str):
            raise GroupError(f"F2: literal must be a string, got {obj!r}")
        return self.reduce(obj)

    def to_literal(self, g):
        return g

    def _mul(self, g, h):
        i = 0
        n, m = len(g), len(h)
        while i < n and i < m and g[n - 1 - i] == h[i].translate(_F2_INV):
            i += 1
        return g[: n - i] + h[i:]

    def _inv(self, g):
        return g[::-1].translate(_F2_INV)

    def _word_length(self, g) -> int:
        return len(g)

    def encode(self, elements):
        width = max((len(g) for g in elements), default=0)
        out = np.zeros((len(elements), max(width, 1)), dtype=np.int64)
        for i, g in enumerate(elements):
            for j, c in enumerate(g):
                out[i, j] = _F2_CODE[c]
        return out

    def decode(self, codes):
        codes = np.asarray(codes)
        if codes.size == 0:
            return [""] * codes.shape[0]
        chars = _F2_CHARS[codes]
        return ["".join(row).rstrip("\0") for row in chars.tolist()]

    def compact_codes(self, codes):
        used = np.flatnonzero((codes != 0).any(axis=0))
        return codes[:, : max(1, used[-1] + 1 if used.size else 1)]

    def multiply_codes(self, a, b):
        n, wa = a.shape
        wb = b.shape[1]
        la = (a > 0).sum(axis=1)
        lb = (b > 0).sum(axis=1)
        rows = np.arange(n)
        cancel = np.zeros(n, dtype=np.int64)
        alive = np.ones(n, dtype=bool)
        for i in range(min(wa, wb)):
            ia = la - 1 - i
            valid = alive & (ia >= 0) & (i < lb)
            tail = a[rows, np.maximum(ia, 0)]
            alive = valid & (tail == _inv_letter_codes(b[:, i]))
            cancel += alive
            if not alive.any():
                break
        keep = la - cancel
        wo = wa + wb
        j = np.arange(wo)[None, :]
        a_pad = np.zeros((n, wo), dtype=np.int64)
        a_pad[:, :wa] = a
        from_a = j < keep[:, None]
        b_idx = j - keep[:, None] + cancel[:, None]
        from_b = ~from_a & (b_idx < lb[:, None])
        b_vals = b[rows[:, None], np.clip(b_idx, 0, wb - 1)]
        return np.where(from_a, a_pad, np.where(from_b, b_vals, 0))

    def invert_codes(self, a):
        n, w = a.shape
        la = (a > 0).sum(axis=1)
        j = np.arange(w)[None, :]
        src = la[:, None] - 1 - j
        vals = a[np.arange(n)[:, None], np.clip(src, 0, w - 1)]
        return np.where(src >= 0, _inv_letter_codes(vals), 0)


# ---------------------------------------------------------------------------
# Baumslag-Solitar BS(1,2) as dyadic affine maps
# ---------------------------------------------------------------------------


def _dyadic(num: int, exp: int) -> tuple[int, int]:
    if num == 0:
        return 0, 0
    if exp < 0:
        return num << -exp, 0
    while exp > 0 and not num & 1:
        num >>= 1
        exp -= 1
    return num, exp


def _bits(x: np.ndarray) -> np.ndarray:
    return np.frexp(np.abs(x).astype(np.float64))[1].astype(np.int64)


class BaumslagSolitar12(GroupModel):
    """BS(1,2) = <t, s | t s t^-1 = s^2>, t: x -> 2x, s: x -> x + 1."""

    name = "BS12"
    width = 3
    identity = (0, 0, 0)
    generators = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0))

    def coerce(self, g):
        try:
            k, num, exp = (int(x) for x in g)
        except (TypeError, ValueError) as exc:
            raise GroupError(f"BS12: not an element: {g!r}") from exc
        if (num, exp) != _dyadic(num, exp):
            raise GroupError(f"BS12: translation {num}/2^{exp} not in lowest terms")
        return (k, num, exp)

    def from_literal(self, obj):
        if isinstance(obj, dict):
            try:
                k, num, exp = int(obj["k"]), int(obj["num"]), int(obj["exp"])
            except (KeyError, TypeError, ValueError) as exc:
                raise GroupError(f"BS12: bad literal {obj!r}") from exc
        else:
            try:
                k, num, exp = (int(x) for x in obj)
            except (TypeError, ValueError) as exc:
                raise GroupError(f"BS12: bad literal {obj!r}") from exc
        num, exp = _dyadic(num, exp)
        return (k, num, exp)

    def to_literal(self, g):
        return {"k": g[0], "num": g[1], "exp": g[2]}

    def _mul(self, g, h):
        k1, n1, e1 = g
        k2, n2, e2 = h
        # (k1, b1)(k2, b2) = (k1 + k2, 2**k1 * b2 + b1)
        e2s = e2 - k1
        top = max(e1, e2s, 0)
        num, exp = _dyadic((n1 << (top - e1)) + (n2 << (top - e2s)), top)
        return (k1 + k2, num, exp)

    def _inv(self, g):
        k, n, e = g
        num, exp = _dyadic(-n, e + k)
        return (-k, num, exp)

    @staticmethod
    def _normalize_codes(num, exp):
        neg = exp < 0
        if neg.any():
            num = np.where(neg, num << np.where(neg, -exp, 0), num)
            exp = np.where(neg, 0, exp)
        exp = np.where(num == 0, 0, exp)
        while True:
            m = (exp > 0) & (num % 2 == 0)
            if not m.any():
                return num, exp
            num = np.where(m, num >> 1, num)
            exp = exp - m

    def multiply_codes(self, a, b):
        k1, n1, e1 = a[:, 0], a[:, 1], a[:, 2]
        k2, n2, e2 = b[:, 0], b[:, 1], b[:, 2]
        e2s = e2 - k1
        top = np.maximum(np.maximum(e1, e2s), 0)
        s1, s2 = top - e1, top - e2s
        if ((_bits(n1) + s1).max(initial=0) > 61) or ((_bits(n2) + s2).max(initial=0) > 61):
            raise OverflowError("BS12 element exceeds the int64 code range")
        num, exp = self._normalize_codes((n1 << s1) + (n2 << s2), top)
        return np.stack([k1 + k2, num, exp], axis=1)

    def invert_codes(self, a):
        k, n, e = a[:, 0], a[:, 1], a[:, 2]
        shift = np.where(e + k < 0, -(e + k), 0)
        if (_bits(n) + shift).max(initial=0) > 62:
            raise OverflowError("BS12 element exceeds the int64 code range")
        num, exp = self._normalize_codes(-n, e + k)
        return np.stack([-k, num, exp], axis=1)


# ---------------------------------------------------------------------------

GROUP_IDS = ("Z1", "Z2", "Z3", "H3", "F2", "BS12")


@lru_cache(maxsize=None)
def get_group(group_id: str) -> GroupModel:
    """Shared model for a group id ("Z1", "Z2", "Z3", "H3", "F2", "BS12")."""
    if group_id in ("Z1", "Z2", "Z3"):
        return IntegerLattice(int(group_id[1]))
    if group_id == "H3":
        return Heisenberg()
    if group_id == "F2":
        return FreeGroup2()
    if group_id == "BS12":
        return BaumslagSolitar12()
    raise GroupError(f"unknown group id {group_id!r}; expected one of {', '.join(GROUP_IDS)}")


def ball(model: GroupModel | str, radius: int) -> Ball:
    if isinstance(model, str):
        model = get_group(model)
    return model.ball(radius)
