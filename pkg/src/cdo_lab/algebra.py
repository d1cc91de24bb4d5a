"""Twisted l1 algebra l1(G, l_inf(G), T) and its side-diagonal representation.

An element ``f = sum_v delta_v (x) m_v`` is stored as a finite map from group
elements ``v`` to multipliers ``m_v``.  Its operator on l2(G) is

    R(f) = sum_v lambda(v) D(m_v),   R(f)(x, y) = m_{x y^-1}(y),

so ``m_v`` is the v-th side diagonal of the matrix.  The product

    (h * f)_v = sum_y (T_y h_{vy}) f_{y^-1},   (T_y m)(x) = m(y^-1 x),

makes ``R`` multiplicative, and ``f*_v = conj(T_{v^-1} f_{v^-1})`` makes it a
*-map.  Forms whose multipliers are all constant (plain convolution
operators) go through a vectorised kernel; everything else is handled
term by term.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from . import kernels
from .errors import BudgetError, GroupError
from .groups import Ball, GroupModel, get_group

DEFAULT_SUPPORT_BUDGET = 200_000
_PAIR_CHUNK = 1 << 20
_FAST_PATH_MIN_PAIRS = 64


class SectionWarning(UserWarning):
    """A finite section is too small for the data placed on it."""


class Multiplier:
    """Element of l_inf(G) of the form ``constant + finitely supported offset``.

    ``m(x) = constant + perturbation.get(x, 0)``.  The offsets are pruned of
    exact zeros, so ``sup_norm`` is exact on an infinite group.
    """

    __slots__ = ("constant", "perturbation")

    def __init__(self, constant: complex = 0.0, perturbation: Mapping | None = None):
        self.constant = complex(constant)
        self.perturbation = {} if not perturbation else {x: complex(v) for x, v in perturbation.items() if v != 0}

    @classmethod
    def _raw(cls, constant: complex, perturbation: dict) -> "Multiplier":
        m = cls.__new__(cls)
        m.constant = constant
        m.perturbation = perturbation
        return m

    @classmethod
    def indicator(cls, points: Iterable, value: complex = 1.0) -> "Multiplier":
        return cls(0.0, {x: value for x in points})

    def __repr__(self) -> str:
        if not self.perturbation:
            return f"Multiplier({self.constant!r})"
        return f"Multiplier({self.constant!r}, {self.perturbation!r})"

    def __call__(self, x) -> complex:
        return self.constant + self.perturbation.get(x, 0.0)

    def is_zero(self) -> bool:
        return self.constant == 0 and not self.perturbation

    def is_constant(self) -> bool:
        return not self.perturbation

    def sup_norm(self) -> float:
        c = self.constant
        return max([abs(c)] + [abs(c + p) for p in self.perturbation.values()])

    def conjugate(self) -> "Multiplier":
        return Multiplier._raw(self.constant.conjugate(), {x: v.conjugate() for x, v in self.perturbation.items()})

    def translate(self, group: GroupModel, y) -> "Multiplier":
        """``(T_y m)(x) = m(y^-1 x)``: the offsets move to ``y * support``."""
        if not self.perturbation:
            return self
        mul = group._mul
        return Multiplier._raw(self.constant, {mul(y, x): v for x, v in self.perturbation.items()})

    def scaled(self, s: complex) -> "Multiplier":
        s = complex(s)
        if s == 0:
            return Multiplier()
        return Multiplier._raw(self.constant * s, {x: v * s for x, v in self.perturbation.items()})

    def __mul__(self, other: "Multiplier") -> "Multiplier":
        c1, c2 = self.constant, other.constant
        p1, p2 = self.perturbation, other.perturbation
        out = {}
        for x in p1.keys() | p2.keys():
            a, b = p1.get(x, 0.0), p2.get(x, 0.0)
            v = c1 * b + c2 * a + a * b
            if v != 0:
                out[x] = v
        return Multiplier._raw(c1 * c2, out)

    def __add__(self, other: "Multiplier") -> "Multiplier":
        out = dict(self.perturbation)
        for x, v in other.perturbation.items():
            s = out.get(x, 0.0) + v
            if s != 0:
                out[x] = s
            else:
                out.pop(x, None)
        return Multiplier._raw(self.constant + other.constant, out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Multiplier):
            return NotImplemented
        return self.constant == other.constant and self.perturbation == other.perturbation

    def distance(self, other: "Multiplier") -> float:
        """Sup-norm distance."""
        d = self.constant - other.constant
        pts = self.perturbation.keys() | other.perturbation.keys()
        return max([abs(d)] + [abs(self(x) - other(x)) for x in pts])


def _as_multiplier(m) -> Multiplier:
    return m if isinstance(m, Multiplier) else Multiplier(m)


class DiagonalForm:
    """Finitely supported element ``sum_v delta_v (x) m_v`` of the twisted algebra.

    ``terms`` maps group elements to :class:`Multiplier` (or scalars, which
    are read as constant multipliers).  Zero multipliers are dropped.
    """

    def __init__(self, group: GroupModel | str, terms: Mapping | None = None):
        self.group = get_group(group) if isinstance(group, str) else group
        coerce = self.group.coerce
        clean = {}
        for v, m in (terms or {}).items():
            m = _as_multiplier(m)
            if m.perturbation:
                m = Multiplier._raw(m.constant, {coerce(x): p for x, p in m.perturbation.items()})
            if not m.is_zero():
                clean[coerce(v)] = m
        self._terms: dict | None = clean
        self._arrays: tuple[np.ndarray, np.ndarray] | None = None

    @classmethod
    def _from_terms(cls, group: GroupModel, terms: dict) -> "DiagonalForm":
        f = cls.__new__(cls)
        f.group = group
        f._terms = terms
        f._arrays = None
        return f

    @classmethod
    def _from_arrays(cls, group: GroupModel, codes: np.ndarray, consts: np.ndarray) -> "DiagonalForm":
        keep = consts != 0
        f = cls.__new__(cls)
        f.group = group
        f._terms = None
        f._arrays = (codes[keep], consts[keep])
        return f

    @classmethod
    def delta(cls, group: GroupModel | str, v, multiplier=1.0) -> "DiagonalForm":
        """``delta_v (x) m``."""
        return cls(group, {v: multiplier})

    @classmethod
    def identity(cls, group: GroupModel | str) -> "DiagonalForm":
        g = get_group(group) if isinstance(group, str) else group
        return cls(g, {g.identity: 1.0})

    @classmethod
    def from_coefficients(cls, group: GroupModel | str, coeffs: Mapping) -> "DiagonalForm":
        """Convolution operator ``sum_v c_v lambda(v)`` (constant multipliers)."""
        return cls(group, {v: Multiplier(c) for v, c in coeffs.items()})

    # -- storage ---------------------------------------------------------
    @property
    def terms(self) -> dict:
        if self._terms is None:
            codes, consts = self._arrays
            elements = self.group.decode(codes)
            self._terms = {v: Multiplier._raw(complex(c), {}) for v, c in zip(elements, consts.tolist())}
        return self._terms

    def constant_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(codes, constants) for a constant-multiplier form."""
        if self._arrays is None:
            if not self.is_constant():
                raise ValueError("form has non-constant multipliers")
            support = list(self._terms)
            codes = self.group.encode(support)
            consts = np.array([self._terms[v].constant for v in support], dtype=np.complex128)
            self._arrays = (codes, consts)
        return self._arrays

    def is_constant(self) -> bool:
        if self._terms is None:
            return True
        return all(not m.perturbation for m in self._terms.values())

    def __len__(self) -> int:
        if self._terms is None:
            return self._arrays[1].shape[0]
        return len(self._terms)

    @property
    def n_entries(self) -> int:
        """Stored coefficients: one per support element plus perturbation offsets."""
        if self._terms is None:
            return len(self)
        return sum(1 + len(m.perturbation) for m in self._terms.values())

    def __getitem__(self, v) -> Multiplier:
        return self.terms.get(self.group.coerce(v), Multiplier())

    def items(self):
        return self.terms.items()

    def support(self) -> list:
        return list(self.terms)

    def support_radius(self) -> int:
        return self.group.support_radius(self.terms)

    def __repr__(self) -> str:
        return f"DiagonalForm({self.group.name}, {len(self)} terms)"

    # -- linear structure ------------------------------------------------
    def __add__(self, other: "DiagonalForm") -> "DiagonalForm":
        _check_same_group(self, other)
        out = dict(self.terms)
        for v, m in other.terms.items():
            s = out[v] + m if v in out else m
            if s.is_zero():
                out.pop(v, None)
            else:
                out[v] = s
        return DiagonalForm._from_terms(self.group, out)

    def __neg__(self) -> "DiagonalForm":
        return self * -1.0

    def __sub__(self, other: "DiagonalForm") -> "DiagonalForm":
        return self + (-other)

    def __mul__(self, s) -> "DiagonalForm":
        if isinstance(s, DiagonalForm):
            return NotImplemented
        s = complex(s)
        if s == 0:
            return DiagonalForm._from_terms(self.group, {})
        if self._terms is None:
            codes, consts = self._arrays
            return DiagonalForm._from_arrays(self.group, codes, consts * s)
        return DiagonalForm._from_terms(self.group, {v: m.scaled(s) for v, m in self._terms.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: "DiagonalForm") -> "DiagonalForm":
        return twisted_product(self, other)

    def star(self) -> "DiagonalForm":
        return twisted_involution(self)

    def l1_norm(self) -> float:
        return l1_norm(self)

    def distance(self, other: "DiagonalForm") -> float:
        """Largest coefficientwise sup-norm difference."""
        _check_same_group(self, other)
        a, b = self.terms, other.terms
        zero = Multiplier()
        return max([0.0] + [a.get(v, zero).distance(b.get(v, zero)) for v in a.keys() | b.keys()])

    def is_selfadjoint(self, tol: float = 1e-12) -> bool:
        return self.distance(twisted_involution(self)) <= tol * max(1.0, l1_norm(self))


def _check_same_group(a: DiagonalForm, b: DiagonalForm) -> None:
    if a.group is not b.group:
        raise GroupError(f"mixed groups: {a.group.name} and {b.group.name}")


# ---------------------------------------------------------------------------
# algebra operations
# ---------------------------------------------------------------------------


def twisted_product(h: DiagonalForm, f: DiagonalForm, budget: int = DEFAULT_SUPPORT_BUDGET) -> DiagonalForm:
    """``h * f`` with ``(h * f)_v = sum_{zw = v} (T_{w^-1} h_z) f_w``.

    Raises BudgetError once the result would hold more than ``budget``
    coefficients.
    """
    _check_same_group(h, f)
    if len(h) == 0 or len(f) == 0:
        return DiagonalForm._from_terms(h.group, {})
    if h.is_constant() and f.is_constant() and len(h) * len(f) >= _FAST_PATH_MIN_PAIRS:
        return _convolve_constant(h, f, budget)
    return _twisted_product_terms(h, f, budget)


def _twisted_product_terms(h: DiagonalForm, f: DiagonalForm, budget: int, translate: bool = True) -> DiagonalForm:
    G = h.group
    mul, inv = G._mul, G._inv
    f_terms = [(w, m, inv(w)) for w, m in f.terms.items()]
    const: dict = {}
    pert: dict = {}
    for z, n in h.terms.items():
        for w, m, w_inv in f_terms:
            v = mul(z, w)
            nt = n.translate(G, w_inv) if translate else n
            c = nt.constant * m.constant
            const[v] = const.get(v, 0.0) + c
            if nt.perturbation or m.perturbation:
                slot = pert.setdefault(v, {})
                p1, p2 = nt.perturbation, m.perturbation
                c1, c2 = nt.constant, m.constant
                for x in p1.keys() | p2.keys():
                    a, b = p1.get(x, 0.0), p2.get(x, 0.0)
                    slot[x] = slot.get(x, 0.0) + c1 * b + c2 * a + a * b
        if len(const) + sum(len(p) for p in pert.values()) > budget:
            raise BudgetError(f"support exceeds budget of {budget} coefficients")
    out = {}
    for v, c in const.items():
        p = {x: val for x, val in pert.get(v, {}).items() if val != 0}
        if c != 0 or p:
            out[v] = Multiplier._raw(complex(c), p)
    return DiagonalForm._from_terms(G, out)


def _convolve_constant(h: DiagonalForm, f: DiagonalForm, budget: int) -> DiagonalForm:
    G = h.group
    hc, hv = h.constant_arrays()
    fc, fv = f.constant_arrays()
    nf = fc.shape[0]
    acc = None
    step = max(1, _PAIR_CHUNK // nf)
    for start in range(0, hc.shape[0], step):
        a = np.repeat(hc[start : start + step], nf, axis=0)
        b = np.tile(fc, (a.shape[0] // nf, 1))
        prod = G.multiply_codes(a, b)
        if acc is None:
            acc = kernels.row_accumulator(prod.shape[1], budget)
        acc.add(prod, np.outer(hv[start : start + step], fv).ravel())
    keys, vals = kernels.sort_rows(*acc.result())
    keys = G.compact_codes(keys)
    return DiagonalForm._from_arrays(G, keys, vals)


def twisted_involution(f: DiagonalForm) -> DiagonalForm:
    """``f*_v = conj(T_{v^-1} f_{v^-1})`` (the modular function is 1)."""
    G = f.group
    if f._terms is None:
        codes, consts = f._arrays
        return DiagonalForm._from_arrays(G, G.invert_codes(codes), consts.conj())
    out = {}
    for z, m in f._terms.items():
        # v = z^-1, so T_{v^-1} = T_z
        out[G._inv(z)] = m.translate(G, z).conjugate()
    return DiagonalForm._from_terms(G, out)


def l1_norm(f: DiagonalForm) -> float:
    """``sum_v ||m_v||_inf``."""
    if f._terms is None:
        return float(np.abs(f._arrays[1]).sum())
    return float(sum(m.sup_norm() for m in f._terms.values()))


# ---------------------------------------------------------------------------
# finite sections
# ---------------------------------------------------------------------------


def _label(group: GroupModel, g) -> str:
    return json.dumps(group.to_literal(g), separators=(",", ":"))


@dataclass(frozen=True, eq=False)
class TruncatedMatrix:
    """Dense finite section indexed by ``ball`` (rows and columns)."""

    ball: Ball
    entries: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def core(self, core_radius: int) -> np.ndarray:
        n = self.ball.core_size(core_radius)
        return self.entries[:n, :n]

    def entry(self, x, y) -> complex:
        idx = self.ball.index
        return complex(self.entries[idx[x], idx[y]])

    def to_csv(self, stream) -> None:
        """Header row/column carry element literals; entries as ``re+imj``."""
        G = self.ball.group
        labels = [_label(G, g) for g in self.ball.elements]
        w = _csv_writer(stream)
        w.writerow([""] + labels)
        for lab, row in zip(labels, self.entries):
            w.writerow([lab] + [_fmt_complex(z) for z in row])


def _csv_writer(stream):
    import csv

    return csv.writer(stream, lineterminator="\n")


def _fmt_complex(z: complex) -> str:
    if z.imag == 0:
        return repr(float(z.real))
    return repr(complex(z)).strip("()")


def _check_support_fits(f: DiagonalForm, ball: Ball) -> None:
    try:
        r = f.support_radius()
    except Exception:
        r = None
    if r is None or r > ball.radius:
        warnings.warn(
            f"support radius {r} exceeds ball radius {ball.radius}: boundary truncation",
            SectionWarning,
            stacklevel=3,
        )


def _perturbation_entries(f: DiagonalForm):
    for s, (v, m) in enumerate(f.terms.items()):
        for x, p in m.perturbation.items():
            yield s, v, x, p


def represent(f: DiagonalForm, ball: Ball) -> TruncatedMatrix:
    """Dense section of ``R(f)`` on ``ball``: ``A(x, y) = m_{x y^-1}(y)``.

    Built row-wise: for each row x and support element v the column is
    ``y = v^-1 x``.
    """
    if ball.group is not f.group:
        raise GroupError(f"mixed groups: {f.group.name} and {ball.group.name}")
    _check_support_fits(f, ball)
    G = f.group
    nb = len(ball)
    M = np.zeros((nb, nb), dtype=np.complex128)
    if len(f) == 0:
        return TruncatedMatrix(ball, M)
    support = f.support()
    vinv = G.invert_codes(G.encode(support))
    consts = np.array([f.terms[v].constant for v in support], dtype=np.complex128)
    s = len(support)
    a = np.repeat(vinv, nb, axis=0)
    b = np.tile(ball.codes, (s, 1))
    cols = ball.positions(G.multiply_codes(a, b))
    rows = np.tile(np.arange(nb), s)
    vals = np.repeat(consts, nb)
    ok = cols >= 0
    M[rows[ok], cols[ok]] = vals[ok]
    idx = ball.index
    for _, v, y, p in _perturbation_entries(f):
        j = idx.get(y)
        if j is None:
            continue
        i = idx.get(G._mul(v, y))
        if i is not None:
            M[i, j] += p
    return TruncatedMatrix(ball, M)


@dataclass(frozen=True, eq=False)
class SparseSection:
    """COO triplets of the finite section of ``R(f)`` on ``ball``."""

    ball: Ball
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    @property
    def n(self) -> int:
        return len(self.ball)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return kernels.matvec(self.rows, self.cols, self.vals, x, self.n)

    def rmatvec(self, x: np.ndarray) -> np.ndarray:
        return kernels.rmatvec(self.rows, self.cols, self.vals, x, self.n)

    def to_dense(self) -> np.ndarray:
        M = np.zeros((self.n, self.n), dtype=np.complex128)
        np.add.at(M, (self.rows, self.cols), self.vals)
        return M


def sparse_section(f: DiagonalForm, ball: Ball) -> SparseSection:
    """Column-wise assembly: ``lambda(v) D(m_v)`` sends ``delta_u`` to ``m_v(u) delta_{vu}``."""
    if ball.group is not f.group:
        raise GroupError(f"mixed groups: {f.group.name} and {ball.group.name}")
    G = f.group
    nb = len(ball)
    if len(f) == 0:
        e = np.zeros(0, dtype=np.int64)
        return SparseSection(ball, e, e, np.zeros(0, dtype=np.complex128))
    if f.is_constant():
        codes, consts = f.constant_arrays()
        support = None
    else:
        support = f.support()
        codes = G.encode(support)
        consts = np.array([f.terms[v].constant for v in support], dtype=np.complex128)
    s = codes.shape[0]
    a = np.repeat(codes, nb, axis=0)
    b = np.tile(ball.codes, (s, 1))
    rows = ball.positions(G.multiply_codes(a, b))
    cols = np.tile(np.arange(nb), s)
    vals = np.repeat(consts, nb)
    if support is not None:
        idx = ball.index
        for k, _, u, p in _perturbation_entries(f):
            j = idx.get(u)
            if j is not None:
                vals[k * nb + j] += p
    ok = (rows >= 0) & (vals != 0)
    return SparseSection(ball, rows[ok], cols[ok], vals[ok])


def apply(f: DiagonalForm, xi: np.ndarray, ball: Ball) -> np.ndarray:
    """``(f xi)(x) = sum_y f(y)(y^-1 x) xi(y^-1 x)`` with xi zero outside ``ball``."""
    xi = np.asarray(xi)
    if xi.shape != (len(ball),):
        raise ValueError(f"vector of length {xi.shape} does not match ball of size {len(ball)}")
    return sparse_section(f, ball).matvec(xi)


# ---------------------------------------------------------------------------
# envelopes and norms
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class EnvelopeFunction:
    """Nonnegative finitely supported ``a`` on the group."""

    group: GroupModel
    values: dict
    core_radius: int | None = None
    tail: float = 0.0

    def __call__(self, z) -> float:
        return self.values.get(z, 0.0) + self.tail

    def total(self) -> float:
        return float(sum(self.values.values()))

    def support(self) -> list:
        return list(self.values)


def minimal_envelope(M: TruncatedMatrix, core_radius: int) -> EnvelopeFunction:
    """``a(z) = max |M(zy, y)|`` over ``y, zy`` in ball(core_radius)."""
    ball = M.ball
    n = ball.core_size(core_radius)
    if n == 0:
        raise ValueError("empty core")
    G = ball.group
    core = ball.codes[:n]
    x = np.repeat(core, n, axis=0)
    y_inv = np.tile(G.invert_codes(core), (n, 1))
    z = G.multiply_codes(x, y_inv)
    uniq, inverse = np.unique(z, axis=0, return_inverse=True)
    amax = kernels.segment_max(inverse.ravel(), np.abs(M.entries[:n, :n]).ravel(), uniq.shape[0])
    keep = amax > 0
    elements = G.decode(uniq[keep])
    return EnvelopeFunction(G, dict(zip(elements, amax[keep].tolist())), core_radius)


def form_envelope(f: DiagonalForm) -> EnvelopeFunction:
    """``z -> ||m_z||_inf``, the envelope of ``R(f)`` over the whole group."""
    return EnvelopeFunction(f.group, {v: m.sup_norm() for v, m in f.terms.items()})


def q_operator_norm(f: DiagonalForm, ball: Ball) -> float:
    """``sum_v ||T_v D(m_v)||`` with each operator norm measured on ``ball``.

    ``T_v`` is an isometry, so each factor is ``max_{x in ball} |m_v(x)|``.
    Warns (SectionWarning) when a perturbation support is not inside the
    ball, in which case the value can fall short of the l1 norm.
    """
    if ball.group is not f.group:
        raise GroupError(f"mixed groups: {f.group.name} and {ball.group.name}")
    total = 0.0
    short = False
    for v, m in f.terms.items():
        inside = [p for x, p in m.perturbation.items() if x in ball.index]
        if len(inside) < len(m.perturbation):
            short = True
        vals = [abs(m.constant + p) for p in inside]
        if len(inside) < len(ball):
            vals.append(abs(m.constant))
        total += max(vals)
    if short:
        warnings.warn(f"ball({ball.radius}) does not cover all multiplier supports", SectionWarning, stacklevel=2)
    return total
