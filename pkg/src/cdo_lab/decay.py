"""Inverses of finite sections and the off-diagonal decay of their envelopes."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .algebra import (
    DiagonalForm,
    EnvelopeFunction,
    TruncatedMatrix,
    form_envelope,
    l1_norm,
    minimal_envelope,
    represent,
    twisted_product,
)
from .errors import IllConditionedError
from .spectral import operator_norm_estimate

COND_LIMIT = 1e8
MASS_FLOOR = 1e-14


def _condition_1norm(M: np.ndarray, lu: np.ndarray) -> float:
    anorm = np.abs(M).sum(axis=0).max()
    rcond, info = lapack.zgecon(lu, anorm, norm="1")
    if info != 0 or rcond == 0:
        return float("inf")
    return 1.0 / rcond


def truncated_inverse(f: DiagonalForm, radius: int, cond_limit: float = COND_LIMIT) -> TruncatedMatrix:
    """Dense inverse of the section of ``R(f)`` on ball(radius) by partial-pivot LU.

    Raises IllConditionedError (carrying the 1-norm condition estimate) for
    singular sections or estimates above ``cond_limit``.
    """
    section = represent(f, f.group.ball(radius))
    M = section.entries
    n = M.shape[0]
    lu, piv, info = lapack.zgetrf(M)
    if info > 0:
        raise IllConditionedError(f"section on ball({radius}) is singular", float("inf"))
    cond = _condition_1norm(M, lu)
    if not cond <= cond_limit:
        raise IllConditionedError(
            f"section on ball({radius}) has condition estimate {cond:.3e} > {cond_limit:.1e}", cond
        )
    inv = scipy.linalg.lu_solve((lu, piv), np.eye(n, dtype=np.complex128))
    return TruncatedMatrix(section.ball, inv)


def inverse_envelope(M: TruncatedMatrix, core_radius: int, support_radius: int | None = None) -> EnvelopeFunction:
    """Minimal envelope of an inverse section over ball(core_radius).

    With ``support_radius`` given, insists on a boundary margin of at least
    twice the support radius.
    """
    if support_radius is not None:
        margin = M.ball.radius - core_radius
        if margin < 2 * support_radius:
            raise ValueError(
                f"core margin {margin} is below twice the support radius ({2 * support_radius})"
            )
    return minimal_envelope(M, core_radius)


def shell_mass(env: EnvelopeFunction) -> list[tuple[int, float]]:
    G = env.group
    lengths = {z: G.word_length(z) for z in env.values}
    top = env.core_radius if env.core_radius is not None else max(lengths.values(), default=0)
    masses = [0.0] * (top + 1)
    for z, a in env.values.items():
        s = lengths[z]
        if s <= top:
            masses[s] += a
    return list(enumerate(masses))


@dataclass
class DecayFit:
    model: str  # "exponential" or "polynomial"
    rate: float
    residual: float
    intercept: float
    exponential_residual: float
    polynomial_residual: float

    @property
    def factor(self) -> float:
        """Per-shell decay factor ``exp(rate)`` of the exponential model."""
        return float(np.exp(self.rate)) if self.model == "exponential" else float("nan")


def _lstsq_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    A = np.stack([np.ones_like(x), x], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return float(coef[1]), float(coef[0]), float(np.sqrt(np.mean(res**2)))


def decay_fit(masses) -> DecayFit:
    """Fit ``log mass`` linearly against ``s`` (exponential) and ``log s`` (polynomial).

    Shell 0 and masses below 1e-14 are left out.  The model with the smaller
    RMS residual wins; ties go to the polynomial model.
    """
    pts = [(s, m) for s, m in masses if s >= 1 and m >= MASS_FLOOR]
    if len(pts) < 4:
        raise ValueError(f"decay fit needs >= 4 usable shells, got {len(pts)}")
    s = np.array([p[0] for p in pts], dtype=float)
    y = np.log(np.array([p[1] for p in pts]))
    e_rate, e_icpt, e_res = _lstsq_line(s, y)
    p_rate, p_icpt, p_res = _lstsq_line(np.log(s), y)
    if e_res < p_res - 1e-12:
        return DecayFit("exponential", e_rate, e_res, e_icpt, e_res, p_res)
    return DecayFit("polynomial", p_rate, p_res, p_icpt, e_res, p_res)


def neumann_oracle(h: DiagonalForm, c: float, terms: int, radius: int | None = None) -> EnvelopeFunction:
    """Envelope bound for ``(delta_e - c h)^-1`` from the Neumann series.

    ``sum_{n <= terms} c^n ||(h^n)_z||_inf`` plus the uniform tail bound
    ``(c ||h||_1)^(terms+1) / (1 - c ||h||_1)``.  The pointwise bound is
    rigorous for entrywise nonnegative ``h`` (no cancellation in powers).
    With ``radius`` given, ``c * operator_norm_estimate(h, radius) < 1`` is
    checked; otherwise ``c ||h||_1 < 1`` is required.
    """
    G = h.group
    if c == 0:
        return EnvelopeFunction(G, {G.identity: 1.0})
    q = abs(c) * l1_norm(h)
    if radius is not None:
        if abs(c) * operator_norm_estimate(h, radius) >= 1:
            raise ValueError("divergent regime: |c| * ||R(h)|| >= 1")
    elif q >= 1:
        raise ValueError("divergent regime: |c| * ||h||_1 >= 1")
    values: dict = {G.identity: 1.0}
    power = DiagonalForm.identity(G)
    for n in range(1, terms + 1):
        power = twisted_product(power, h)
        scale = abs(c) ** n
        for z, a in form_envelope(power).values.items():
            values[z] = values.get(z, 0.0) + scale * a
    tail = q ** (terms + 1) / (1 - q) if q < 1 else float("inf")
    return EnvelopeFunction(G, values, tail=tail)


@dataclass
class DecayReport:
    group: str
    element: str
    radius: int
    core_radius: int
    masses: list[tuple[int, float]]
    fit: DecayFit | None
    condition: float = float("nan")
    fit_error: str | None = None

    def partial_sums(self) -> list[float]:
        return list(np.cumsum([m for _, m in self.masses]))

    def summary(self) -> dict:
        out = {
            "group": self.group,
            "element": self.element,
            "radius": self.radius,
            "core_radius": self.core_radius,
            "condition": self.condition,
            "total_mass": float(sum(m for _, m in self.masses)),
        }
        if self.fit is not None:
            out.update(
                model=self.fit.model,
                rate=self.fit.rate,
                residual=self.fit.residual,
                exponential_residual=self.fit.exponential_residual,
                polynomial_residual=self.fit.polynomial_residual,
            )
        else:
            out.update(model=None, rate=None, residual=None, fit_error=self.fit_error)
        return out

    def to_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True, indent=2)


def decay_report(
    f: DiagonalForm,
    radius: int,
    core_radius: int,
    element_id: str = "",
    cond_limit: float = COND_LIMIT,
) -> DecayReport:
    inv = truncated_inverse(f, radius, cond_limit=cond_limit)
    env = inverse_envelope(inv, core_radius)
    masses = shell_mass(env)
    try:
        fit, err = decay_fit(masses), None
    except ValueError as exc:
        fit, err = None, str(exc)
    M = represent(f, inv.ball).entries
    cond = float(np.linalg.norm(M, 1) * np.linalg.norm(inv.entries, 1))
    return DecayReport(f.group.name, element_id, radius, core_radius, masses, fit, cond, err)
