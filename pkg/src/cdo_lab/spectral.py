"""Gelfand radii in the twisted algebra versus operator norms of finite sections.

For ``f`` in the twisted l1 algebra the l1 spectral radius of ``f* f`` is
estimated from ``||(f* f)^n||_1^(1/n)`` along repeated squaring, and the
l2 operator norm of ``R(f)`` from finite sections by matrix-free power
iteration.  Their discrepancy ``r - nu**2`` is the Hulanicki gap: about
zero where spectral invariance holds, strictly positive on e.g. F2.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .algebra import (
    DEFAULT_SUPPORT_BUDGET,
    DiagonalForm,
    l1_norm,
    represent,
    sparse_section,
    twisted_involution,
    twisted_product,
)
from .errors import BudgetError, ConvergenceError, NotSelfAdjointError

POWER_TOL = 1e-9
POWER_MAX_ITER = 5000
DENSE_LIMIT = 2000


@dataclass
class RadiusSequence:
    """``(n, ||f^n||_1 ** (1/n))`` for ``n = 1, 2, 4, ...``."""

    exponents: list[int]
    values: list[float]
    requested_depth: int
    achieved_depth: int

    @property
    def best(self) -> float:
        return min(self.values)

    @property
    def truncated(self) -> bool:
        return self.achieved_depth < self.requested_depth


def power_radius_sequence(
    f: DiagonalForm, depth: int, budget: int = DEFAULT_SUPPORT_BUDGET
) -> RadiusSequence:
    """Norm roots along ``f, f^2, f^4, ..., f^(2**depth)``.

    Stops early (``achieved_depth < depth``) when a square would exceed the
    support budget.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if f.n_entries > budget:
        raise BudgetError(f"input already exceeds budget of {budget} coefficients")
    exps, vals = [1], [l1_norm(f)]
    power = f
    achieved = 0
    for k in range(1, depth + 1):
        try:
            power = twisted_product(power, power, budget=budget)
        except BudgetError:
            if k == 1:
                raise
            break
        n = 2**k
        exps.append(n)
        vals.append(l1_norm(power) ** (1.0 / n))
        achieved = k
    return RadiusSequence(exps, vals, depth, achieved)


@dataclass
class PowerIterationResult:
    value: float
    iterations: int
    converged: bool


def largest_singular_value(
    matvec,
    rmatvec,
    n: int,
    tol: float = POWER_TOL,
    max_iter: int = POWER_MAX_ITER,
    seed: int = 0,
) -> PowerIterationResult:
    """Power iteration on ``M^H M`` from a random complex start.

    The estimate ``||M v||`` with ``||v|| = 1`` never exceeds the true top
    singular value.
    """
    if n == 0:
        return PowerIterationResult(0.0, 0, True)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    sigma = 0.0
    for it in range(1, max_iter + 1):
        w = matvec(v)
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return PowerIterationResult(0.0, it, True)
        u = rmatvec(w)
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return PowerIterationResult(new, it, True)
        v = u / nu
        if abs(new - sigma) <= tol * new:
            return PowerIterationResult(new, it, True)
        sigma = new
    return PowerIterationResult(sigma, max_iter, False)


def operator_norm_estimate(
    f: DiagonalForm,
    radius: int,
    tol: float = POWER_TOL,
    max_iter: int = POWER_MAX_ITER,
    seed: int = 0,
) -> float:
    """Largest singular value of the section of ``R(f)`` on ball(radius)."""
    sec = sparse_section(f, f.group.ball(radius))
    res = largest_singular_value(sec.matvec, sec.rmatvec, sec.n, tol=tol, max_iter=max_iter, seed=seed)
    if not res.converged:
        raise ConvergenceError(
            f"power iteration did not reach tol={tol} in {max_iter} steps (last {res.value!r})",
            res.value,
            res.iterations,
        )
    return res.value


@dataclass
class Spectrum:
    """Eigenvalues in ascending order; ``mode`` is "dense" or "extremal"."""

    values: np.ndarray
    mode: str


def hermitian_spectrum(f: DiagonalForm, radius: int, dense_limit: int = DENSE_LIMIT, tol: float = 1e-12) -> Spectrum:
    """Spectrum of the (Hermitian-symmetrised) section of a selfadjoint ``f``.

    Above ``dense_limit`` basis elements only the smallest and largest
    eigenvalues are returned (Lanczos), flagged by ``mode="extremal"``.
    """
    if not f.is_selfadjoint(tol):
        raise NotSelfAdjointError("hermitian_spectrum needs f = f*")
    ball = f.group.ball(radius)
    if len(ball) <= dense_limit:
        M = represent(f, ball).entries
        H = 0.5 * (M + M.conj().T)
        return Spectrum(scipy.linalg.eigvalsh(H), "dense")
    sec = sparse_section(f, ball)
    n = sec.n

    def mv(x):
        x = np.ravel(x)
        return 0.5 * (sec.matvec(x) + sec.rmatvec(x))

    op = scipy.sparse.linalg.LinearOperator((n, n), matvec=mv, dtype=np.complex128)
    lo = scipy.sparse.linalg.eigsh(op, k=1, which="SA", return_eigenvectors=False)
    hi = scipy.sparse.linalg.eigsh(op, k=1, which="LA", return_eigenvectors=False)
    return Spectrum(np.array([float(lo[0]), float(hi[0])]), "extremal")


@dataclass
class GapReport:
    """Hulanicki gap ``r_est - nu_est**2`` for one element at one scale.

    Positive gap: evidence against spectral invariance at this scale.
    Near zero: consistent with it.  Never a proof either way.
    """

    group: str
    element: str
    radius: int
    depth: int
    r_est: float
    nu_est: float
    gap: float
    achieved_depth: int
    sequence: list[float] = field(default_factory=list)

    CSV_FIELDS = ("group", "element", "radius", "depth", "r_est", "nu_est", "gap")

    def to_dict(self) -> dict:
        return asdict(self)

    def csv_row(self) -> list:
        return [self.group, self.element, self.radius, self.depth, repr(self.r_est), repr(self.nu_est), repr(self.gap)]


def hulanicki_gap(
    f: DiagonalForm,
    radius: int,
    depth: int,
    element_id: str = "",
    budget: int = DEFAULT_SUPPORT_BUDGET,
    tol: float = POWER_TOL,
    max_iter: int = POWER_MAX_ITER,
    seed: int = 0,
) -> GapReport:
    """``min RadiusSequence(f* f) - operator_norm_estimate(f)**2``."""
    ff = twisted_product(twisted_involution(f), f, budget=budget)
    seq = power_radius_sequence(ff, depth, budget=budget)
    nu = operator_norm_estimate(f, radius, tol=tol, max_iter=max_iter, seed=seed)
    r = seq.best
    gap = r - nu * nu
    if not math.isfinite(gap):
        raise ArithmeticError("non-finite gap")
    return GapReport(f.group.name, element_id, radius, depth, r, nu, gap, seq.achieved_depth, list(seq.values))
