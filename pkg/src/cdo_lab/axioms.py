"""Randomised Banach *-algebra axiom suite for the twisted l1 algebra."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import DiagonalForm, Multiplier, _twisted_product_terms, l1_norm, twisted_involution, twisted_product
from .groups import GroupModel, get_group
from .io import form_to_json

REL_TOL = 1e-12

Product = Callable[[DiagonalForm, DiagonalForm], DiagonalForm]


def _rand_complex(rng: np.random.Generator) -> complex:
    return complex(rng.uniform(-1, 1), rng.uniform(-1, 1))


def random_multiplier(G: GroupModel, rng: np.random.Generator, n_perturb: int = 2, radius: int = 2) -> Multiplier:
    c = 0.0 if rng.random() < 0.2 else _rand_complex(rng)
    pert = {G.random_element(rng, radius): _rand_complex(rng) for _ in range(n_perturb)}
    return Multiplier(c, pert)


def random_form(
    group: GroupModel | str,
    rng: np.random.Generator,
    n_terms: int = 3,
    support_radius: int = 2,
    n_perturb: int = 2,
    perturb_radius: int = 2,
) -> DiagonalForm:
    """Random form with ``n_terms`` side diagonals of "constant + offsets" type."""
    G = get_group(group) if isinstance(group, str) else group
    terms = {}
    for _ in range(n_terms):
        v = G.random_element(rng, support_radius)
        terms[v] = random_multiplier(G, rng, n_perturb, perturb_radius)
    return DiagonalForm(G, terms)


def random_constant_form(
    group: GroupModel | str, rng: np.random.Generator, n_terms: int = 4, support_radius: int = 2, nonnegative: bool = False
) -> DiagonalForm:
    G = get_group(group) if isinstance(group, str) else group
    coeffs = {}
    for _ in range(n_terms):
        v = G.random_element(rng, support_radius)
        coeffs[v] = rng.uniform(0.1, 1.0) if nonnegative else _rand_complex(rng)
    return DiagonalForm.from_coefficients(G, coeffs)


def mutant_product(h: DiagonalForm, f: DiagonalForm) -> DiagonalForm:
    """Deliberately wrong product that skips the translation T_y (harness self-test)."""
    return _twisted_product_terms(h, f, budget=10**9, translate=False)


@dataclass
class AxiomFailure:
    check: str
    trial: int
    discrepancy: float
    bound: float
    forms: dict

    def to_json(self, group: GroupModel) -> dict:
        return {
            "check": self.check,
            "group": group.name,
            "trial": self.trial,
            "discrepancy": self.discrepancy,
            "bound": self.bound,
            "forms": {k: form_to_json(v) for k, v in self.forms.items()},
        }


@dataclass
class AxiomReport:
    group: str
    trials: int
    seed: int
    counts: dict = field(default_factory=dict)
    failures: list[AxiomFailure] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


CHECKS = ("unit", "associativity", "anti-homomorphism", "involution", "isometry", "submultiplicativity")


def run_axiom_suite(
    group: GroupModel | str,
    trials: int = 200,
    seed: int = 42,
    product: Product = twisted_product,
    rel_tol: float = REL_TOL,
    stop_after: int | None = 1,
) -> AxiomReport:
    """Check unit, associativity, (f h)* = h* f*, f** = f, ||f*|| = ||f|| and
    ||f h|| <= ||f|| ||h|| on ``trials`` random triples."""
    G = get_group(group) if isinstance(group, str) else group
    rng = np.random.default_rng(seed)
    report = AxiomReport(G.name, trials, seed, {c: 0 for c in CHECKS})
    e = DiagonalForm.identity(G)

    def record(check, trial, disc, bound, **forms):
        report.counts[check] += 1
        if not disc <= bound:
            report.failures.append(AxiomFailure(check, trial, float(disc), float(bound), forms))

    for t in range(trials):
        f, g, h = (random_form(G, rng) for _ in range(3))
        nf, ng, nh = l1_norm(f), l1_norm(g), l1_norm(h)

        record("unit", t, max(product(e, f).distance(f), product(f, e).distance(f)), 0.0, f=f)

        fg = product(f, g)
        lhs = product(fg, h)
        rhs = product(f, product(g, h))
        record("associativity", t, lhs.distance(rhs), rel_tol * max(1.0, nf * ng * nh), f=f, g=g, h=h)

        fh = product(f, h)
        disc = twisted_involution(fh).distance(product(twisted_involution(h), twisted_involution(f)))
        record("anti-homomorphism", t, disc, rel_tol * max(1.0, nf * nh), f=f, h=h)

        fs = twisted_involution(f)
        record("involution", t, twisted_involution(fs).distance(f), 0.0, f=f)
        record("isometry", t, abs(l1_norm(fs) - nf), rel_tol * max(1.0, nf), f=f)

        record("submultiplicativity", t, l1_norm(fh) - nf * nh, rel_tol * max(1.0, nf * nh), f=f, h=h)
        if stop_after is not None and len(report.failures) >= stop_after:
            break
    return report
