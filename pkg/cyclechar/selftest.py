"""
Bundled acceptance suite: every shipped scenario plus randomized checks that
do not fit a single declarative model.
"""

from fractions import Fraction
from typing import Callable, List, Optional, Tuple

import numpy as np
import sympy

from .cycles import (character, character_exponential, connection_variation_chain, cycle, matrix_form_cycle,
                     rho_from_images, simplex_monomial_integral, unitize, verify_theorem_one)
from .cyclic import compare, reduced_check, set_sign_injection, strict_upper
from .fredholm import (commuting_pairing, fredholm_index, index_pairing, omega_cycle, random_even_module,
                       random_odd_module, random_projection, random_unitary, rank_one_module, sf_pairing,
                       unitary_spectral_flow, verify_theorem_coin)
from .graded import MatrixForms, Multiplier, connection_derivation, torus_trace
from .logger import logger
from .progress import ProgressPrinter
from .runner import Outcome, Report, _check, _execute, conventions, run
from .scenario import bundled, load
from .utils import compositions

SCENARIOS = ("fredholm_rank_one", "fredholm_homotopy", "matrix_forms", "winding", "torus_rotation", "gv_circle")
FULL_ONLY = ("gv_torus",)

# (d, N) for the randomized connection-variation chains
_CHAIN_SIZES = [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1), (3, 2), (4, 1), (2, 3), (4, 2)]


def check_random_theorem_one(rng: np.random.Generator, count: int) -> Outcome:
    checks = []
    for i in range(count):
        d, N = _CHAIN_SIZES[i % len(_CHAIN_SIZES)]
        C = matrix_form_cycle(d, N, kernel="exact", rng=rng)
        eta = C.omega.random_element(rng, 1)
        checks.append(_check(verify_theorem_one(connection_variation_chain(C, eta))))
    return {"chains": count}, checks


def check_random_index(rng: np.random.Generator, count: int, tol: float) -> Outcome:
    checks = []
    for i in range(count):
        r = 1 + i % 2
        plus, minus = (2, 1) if i % 3 else (1, 3)
        M = random_even_module(rng, r, plus, minus, scale=0.5)
        N = 1 + (i // 2) % (2 if r == 2 else 3)
        selfadjoint = i % 2 == 0
        e = random_projection(rng, M.algebra, N, selfadjoint=selfadjoint)
        m = 1 + i % 3
        index = fredholm_index(M, e).index
        deviation = abs(complex(index_pairing(M, e, m)) - index)
        row = {"label": f"module {i} (r={r}, N={N}, m={m})", "index": index, "deviation": deviation,
               "passed": deviation <= tol}
        if selfadjoint:
            c = abs(commuting_pairing(M, e, m) - index)
            row["commuting_deviation"] = c
            row["passed"] = row["passed"] and c <= tol
        checks.append(row)
    return {"modules": count}, checks


def check_random_spectral_flow(rng: np.random.Generator, count: int, tol: float) -> Outcome:
    checks = []
    for i in range(count):
        M = random_odd_module(rng, 1 + i % 2, 2 + i % 2)
        u = random_unitary(rng, M.algebra, 1 + (i // 2) % 2)
        m = i % 2
        flow = unitary_spectral_flow(M, u).value
        deviation = abs(sf_pairing(M, u, m) - flow)
        checks.append({"label": f"module {i} (m={m})", "flow": flow, "deviation": deviation,
                       "passed": deviation <= tol})
    return {"modules": count}, checks


def check_alpha_invariance(rng: np.random.Generator) -> Outcome:
    cycles = [matrix_form_cycle(2, 2, kernel="exact", rng=rng), omega_cycle(rank_one_module(), 1)]
    checks = []
    for C in cycles:
        ch = character(C)
        for alpha in (1, -1, 2, -3):
            checks.append(_check(compare(character_exponential(C, alpha), ch,
                                         label=f"alpha={alpha} on {C.name}")))
    return {"alphas": [1, -1, 2, -3]}, checks


def _simplex_by_integration(exponents: Tuple[int, ...]) -> Fraction:
    """Iterated integration over {t_1..t_k >= 0, sum <= 1} with t_0 = 1 - sum."""
    k = len(exponents) - 1
    ts = sympy.symbols(f"t1:{k + 1}") if k else ()
    expr = (1 - sum(ts)) ** exponents[0]
    for t, e in zip(ts, exponents[1:]):
        expr = expr * t ** e
    for j in range(k - 1, -1, -1):
        expr = sympy.integrate(sympy.expand(expr), (ts[j], 0, 1 - sum(ts[:j])))
    value = sympy.Rational(expr)
    return Fraction(int(value.p), int(value.q))


def check_simplex_integrals(max_total: int, max_k: int = 3) -> Outcome:
    worst = Fraction(0)
    count = 0
    for k in range(max_k + 1):
        for total in range(max_total + 1):
            for exponents in compositions(total, k + 1):
                diff = abs(simplex_monomial_integral(exponents) - _simplex_by_integration(exponents))
                worst = max(worst, diff)
                count += 1
    return {"evaluated": count}, [{"label": "simplex integrals", "passed": worst == 0, "max_residual": float(worst)}]


def check_reduced_unitization(rng: np.random.Generator) -> Outcome:
    """A nonunital chain over strictly upper triangular matrices, unitized."""
    forms = MatrixForms(2, 3, "exact")
    A = strict_upper(3, "exact")
    images = [forms.constant(R) for R in A.representation]
    connection = forms.random_element(rng, 1)
    theta = connection * connection
    C = cycle(forms, A, rho_from_images(images), connection_derivation(forms, connection),
              Multiplier.from_element(theta), torus_trace(forms), images + [connection], unital=False,
              name="strict-upper")
    unital = unitize(C)
    phi = character(unital)
    reduced = reduced_check(phi)
    exp = compare(character_exponential(unital, 2), phi, label="alpha=2 on the unitization")
    return {"degree": phi.degree}, [{"label": "reduced", "passed": reduced.passed,
                                     "max_residual": reduced.max_residual, "unit_value": reduced.unit_value,
                                     "evaluated": reduced.evaluated}, _check(exp)]


def check_theorem_coin(rng: np.random.Generator, count: int, tol: float) -> Outcome:
    checks = []
    M = rank_one_module("float")
    e = random_projection(rng, M.algebra, 2, rank=1)
    checks.append(_check(verify_theorem_coin(M, 1, [e], tol)))
    for i in range(count):
        M = random_even_module(rng, 1, 2, 1, scale=0.7 + 0.4 * i)
        e = random_projection(rng, M.algebra, 1 + i % 2)
        checks.append(_check(verify_theorem_coin(M, 1 + i % 2, [e], tol)))
    return {"modules": count + 1}, checks


def _checks(quick: bool, rng: np.random.Generator, pairing_tol: float) -> List[Tuple[str, str, Callable[[], Outcome]]]:
    return [
        ("random theorem-1 chains", "verify-theorem-1", lambda: check_random_theorem_one(rng, 6 if quick else 20)),
        ("random index pairings", "index-pairing", lambda: check_random_index(rng, 10 if quick else 50, pairing_tol)),
        ("random spectral flow", "spectral-flow", lambda: check_random_spectral_flow(rng, 6 if quick else 20,
                                                                                      pairing_tol)),
        ("alpha invariance", "compute-character", lambda: check_alpha_invariance(rng)),
        ("simplex integrals", "compute-character", lambda: check_simplex_integrals(4 if quick else 8)),
        ("unitization", "verify-cocycle", lambda: check_reduced_unitization(rng)),
        ("F~ reduction", "theorem-coin", lambda: check_theorem_coin(rng, 2 if quick else 5, pairing_tol)),
    ]


def selftest(quick: bool = False, corrupt_sign: bool = False, exact: bool = False, seed: int = 0,
             pairing_tol: float = 1e-6, progress: Optional[ProgressPrinter] = None) -> Report:
    """
    Run the bundled scenarios and the randomized checks. `corrupt_sign` negates B
    for the whole run (every bicomplex identity must then fail); `exact` forces the
    exact kernel on every scenario that supports it.
    """
    names = SCENARIOS if quick else SCENARIOS + FULL_ONLY
    report = Report("selftest", {"quick": quick, "corrupt_sign": corrupt_sign, "exact": exact, "seed": seed,
                                 "pairing_tol": pairing_tol}, conventions())
    set_sign_injection(corrupt_sign)
    try:
        for name in names:
            scenario = load(bundled(name))
            sub = run(scenario, kernel="exact" if exact else None, seed=seed, progress=progress)
            for t in sub.tasks:
                t.name = f"{name}/{t.name}"
                report.tasks.append(t)
        rng = np.random.default_rng(seed)
        checks = _checks(quick, rng, pairing_tol)
        for i, (name, kind, call) in enumerate(checks, 1):
            if progress is not None:
                progress.start(name, i, len(checks))
            result = _execute(name, kind, pairing_tol, call)
            if progress is not None:
                progress.done(result.status)
            report.tasks.append(result)
    finally:
        set_sign_injection(False)
    logger.info("selftest: %s", report.counts())
    return report
