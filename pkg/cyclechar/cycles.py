"""
Generalized chains and cycles, their boundaries and characters.

A chain is (Omega, dOmega, r, rho, nabla, nabla', theta, int) with a trace of
degree n. Its character has components k = n, n-2, .. given by

    Ch^k(a0..ak) = (-1)^j / (j+k)!  sum_{i0+..+ik = j}
                   int rho(a0) theta^i0 nabla rho(a1) theta^i1 .. nabla rho(ak) theta^ik

with j = (n-k)/2, theta acting on the right. Every formula consumes the
curvature only through its multiplier actions.
"""

from dataclasses import asdict, dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cyclic import (Algebra, BBCochain, Cochain, FiniteAlgebra, ResidualReport,
                     bb, compare, diagonal_algebra, matrix_algebra, residual_report, shift_S, tensor,
                     unitize as unitize_algebra)
from .errors import BackendMismatchError, ConventionError
from .extensions import DirectSum, IntervalAlgebra, UnitizedAlgebra, XMatrixAlgebra, graded_tensor_product
from .graded import (Derivation, GradedAlgebra, GradedElement, GradedTrace, MatrixForms, Multiplier, ZeroAlgebra,
                     check_graded_trace, check_multiplier, connection_derivation, de_rham, torus_trace)
from .logger import logger, timed
from .scalars import factorial_fraction
from .utils import compositions, sign_of


@dataclass
class GeneralizedChain:
    """A generalized chain; `boundary_omega is None` makes it a cycle."""

    omega: GradedAlgebra
    algebra: Algebra
    rho: Callable[[Any], GradedElement]
    nabla: Derivation
    theta: Multiplier
    trace: GradedTrace
    boundary_omega: Optional[GradedAlgebra] = None
    restrict: Optional[Callable[[GradedElement], GradedElement]] = None
    boundary_nabla: Optional[Derivation] = None
    boundary_theta: Optional[Multiplier] = None
    lift: Optional[Callable[[GradedElement], GradedElement]] = None
    alt_lift: Optional[Callable[[GradedElement], GradedElement]] = None
    samples: List[GradedElement] = field(default_factory=list)
    boundary_samples: List[GradedElement] = field(default_factory=list)
    unital: bool = True
    name: str = "chain"

    @property
    def degree(self) -> int:
        return self.trace.degree

    @property
    def is_cycle(self) -> bool:
        return self.boundary_omega is None

    @property
    def is_zero(self) -> bool:
        return isinstance(self.omega, ZeroAlgebra)

    @property
    def kernel(self):
        return self.omega.kernel


def cycle(omega: GradedAlgebra, algebra: Algebra, rho: Callable[[Any], GradedElement], nabla: Derivation,
          theta: Optional[Multiplier], trace: GradedTrace, samples: Sequence[GradedElement] = (),
          unital: bool = True, name: str = "cycle") -> GeneralizedChain:
    return GeneralizedChain(omega, algebra, rho, nabla, theta or Multiplier.zero(), trace,
                            samples=list(samples), unital=unital, name=name)


def zero_chain(algebra: Algebra, degree: int, kernel: Any = "exact", name: str = "0") -> GeneralizedChain:
    """The chain over the zero algebra; its boundary and character vanish."""
    omega = ZeroAlgebra(kernel)
    trace = GradedTrace(degree, lambda x: omega.kernel.zero(), omega.kernel, "0")
    return cycle(omega, algebra, lambda a: omega.zero(), Derivation(omega, lambda x: omega.zero(), "0"),
                 Multiplier.zero(), trace, name=name)


def rho_from_images(images: Sequence[GradedElement]) -> Callable[[np.ndarray], GradedElement]:
    """Linear rho on coordinate vectors: x -> sum x_i images[i]."""
    omega = images[0].algebra
    K = omega.kernel

    def rho(x: np.ndarray) -> GradedElement:
        out = omega.zero()
        for v, img in zip(x, images):
            if not K.is_zero(v):
                out = out + img.scale(v)
        return out

    return rho


class _Images:
    """rho(a) and nabla rho(a), memoized per argument object."""

    def __init__(self, C: GeneralizedChain):
        self.C = C
        self._memo: Dict[int, Tuple[Any, GradedElement, GradedElement]] = {}

    def get(self, a: Any) -> Tuple[GradedElement, GradedElement]:
        hit = self._memo.get(id(a))
        if hit is not None and hit[0] is a:
            return hit[1], hit[2]
        r = self.C.rho(a)
        nr = self.C.nabla(r)
        if len(self._memo) > 4096:
            self._memo.clear()
        self._memo[id(a)] = (a, r, nr)
        return r, nr


def character_coefficient(n: int, k: int) -> Fraction:
    j = (n - k) // 2
    return sign_of(j) * factorial_fraction([], [j + k])


def _character_component(C: GeneralizedChain, k: int, images: _Images) -> Cochain:
    n = C.degree
    j = (n - k) // 2
    coef = C.kernel.scalar(character_coefficient(n, k))
    theta = C.theta

    def fn(args: Tuple[Any, ...]) -> Any:
        r0, _ = images.get(args[0])
        # row[c] holds all words with c curvature insertions so far
        row = [r0.truncate(n)]
        for c in range(1, j + 1):
            row.append(theta.right(row[-1]).truncate(n))
        for l in range(1, k + 1):
            _, nr = images.get(args[l])
            new = []
            for c in range(j + 1):
                acc = (row[c] * nr).truncate(n)
                if c:
                    acc = acc + theta.right(new[c - 1]).truncate(n)
                new.append(acc)
            row = new
        return C.trace(row[j]) * coef

    return Cochain(C.algebra, k, fn, None, f"Ch^{k}({C.name})")


def character(C: GeneralizedChain) -> BBCochain:
    """Ch(C); a nonunital chain is unitized first and the reduced cochain over A+ returned."""
    if C.is_zero:
        return BBCochain(C.algebra, C.degree, {}, f"Ch({C.name})")
    if not C.unital:
        return character(unitize(C))
    images = _Images(C)
    n = C.degree
    comps = {k: _character_component(C, k, images) for k in range(n % 2, n + 1, 2)}
    logger.debug("character %s: degree=%d components=%s", C.name, n, sorted(comps))
    return BBCochain(C.algebra, n, comps, f"Ch({C.name})")


def simplex_monomial_integral(exponents: Sequence[int]) -> Fraction:
    """int over the standard k-simplex of t0^i0 .. tk^ik = i0! .. ik! / (i0+..+ik+k)!."""
    if any(i < 0 for i in exponents):
        raise ConventionError(f"exponents must be non-negative: {exponents}")
    return factorial_fraction(exponents, [sum(exponents) + len(exponents) - 1])


def _word(C: GeneralizedChain, images: _Images, args: Tuple[Any, ...], powers: Sequence[int]) -> GradedElement:
    n = C.degree
    r0, _ = images.get(args[0])
    w = r0
    for _ in range(powers[0]):
        w = C.theta.right(w).truncate(n)
    for l in range(1, len(args)):
        _, nr = images.get(args[l])
        w = (w * nr).truncate(n)
        for _ in range(powers[l]):
            w = C.theta.right(w).truncate(n)
    return w


def character_exponential(C: GeneralizedChain, alpha: Any = 1) -> BBCochain:
    """
    The simplex form: alpha^{-j} int_simplex int rho(a0) e^{-alpha t0 theta} nabla rho(a1) ..,
    expanded term by term; the expansion stops at the curvature budget j.
    """
    if isinstance(alpha, bool) or not isinstance(alpha, Rational):
        logger.error("non-rational alpha: %r", alpha)
        raise ConventionError(f"alpha must be a nonzero rational (int or Fraction), got {alpha!r}")
    alpha = Fraction(alpha)
    if alpha == 0:
        raise ConventionError("alpha must be nonzero")
    if not C.unital:
        return character_exponential(unitize(C), alpha)
    images = _Images(C)
    n = C.degree
    K = C.kernel
    comps = {}
    for k in range(n % 2, n + 1, 2):
        j = (n - k) // 2
        terms = []
        for powers in compositions(j, k + 1):
            w = alpha ** (-j) * simplex_monomial_integral(powers)
            for i in powers:
                w *= (-alpha) ** i * factorial_fraction([], [i])
            terms.append((powers, K.scalar(w)))

        def fn(args: Tuple[Any, ...], terms=terms) -> Any:
            total = K.zero()
            for powers, w in terms:
                total = total + C.trace(_word(C, images, args, powers)) * w
            return total

        comps[k] = Cochain(C.algebra, k, fn, None, f"ChExp^{k}({C.name})")
    return BBCochain(C.algebra, n, comps, f"ChExp({C.name})")


def connes_cycle_character(C: GeneralizedChain) -> BBCochain:
    """tau(a0..an) = (1/n!) int rho(a0) nabla rho(a1) .. nabla rho(an), for theta = 0."""
    if not C.theta.is_zero():
        logger.error("connes_cycle_character on a cycle with curvature: %s", C.name)
        raise ConventionError("the plain cycle character needs theta = 0")
    images = _Images(C)
    n = C.degree
    coef = C.kernel.scalar(factorial_fraction([], [n]))

    def fn(args: Tuple[Any, ...]) -> Any:
        return C.trace(_word(C, images, args, [0] * (n + 1))) * coef

    return BBCochain(C.algebra, n, {n: Cochain(C.algebra, n, fn, None, f"tau({C.name})")}, f"tau({C.name})")


# boundaries


def boundary(C: GeneralizedChain) -> GeneralizedChain:
    """The degree n-1 cycle (dOmega, r rho, nabla', r(theta), int') with int' xi' = int nabla(lift xi')."""
    if C.is_cycle:
        return zero_chain(C.algebra, C.degree - 1, C.kernel, f"d({C.name})=0")
    if C.lift is None:
        logger.error("chain %s has no lift for its boundary trace", C.name)
        raise ConventionError(f"chain {C.name} provides no lift of boundary elements")
    trace = GradedTrace(C.degree - 1, lambda x: C.trace(C.nabla(C.lift(x))), C.kernel, f"d({C.trace.name})")
    rho = C.rho
    restrict = C.restrict
    return GeneralizedChain(C.boundary_omega, C.algebra, lambda a: restrict(rho(a)), C.boundary_nabla,
                            C.boundary_theta or Multiplier.zero(), trace, samples=list(C.boundary_samples),
                            unital=C.unital, name=f"d({C.name})")


def lift_independence(C: GeneralizedChain, samples: Optional[Sequence[GradedElement]] = None) -> float:
    """Largest |int nabla(lift xi) - int nabla(alt_lift xi)| over boundary samples of degree n-1."""
    if C.is_cycle or C.alt_lift is None:
        return 0.0
    K = C.kernel
    worst = 0.0
    for x in samples if samples is not None else C.boundary_samples:
        part = x.part(C.degree - 1)
        if part.is_zero():
            continue
        diff = C.trace(C.nabla(C.lift(part))) - C.trace(C.nabla(C.alt_lift(part)))
        worst = max(worst, K.magnitude(diff))
    return worst


@dataclass
class ChainReport:
    name: str
    tol: float
    leibniz: float = 0.0
    curvature: float = 0.0
    nabla_theta: float = 0.0
    multiplier: float = 0.0
    trace_property: float = 0.0
    closedness: float = 0.0
    restriction: float = 0.0
    lift_independence: float = 0.0

    @property
    def max_residual(self) -> float:
        return max(self.leibniz, self.curvature, self.nabla_theta, self.multiplier, self.trace_property,
                   self.closedness, self.restriction, self.lift_independence)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def check_chain(C: GeneralizedChain, samples: Optional[Sequence[GradedElement]] = None,
                tol: float = 0.0) -> ChainReport:
    """Sampled chain axioms: Leibniz, nabla^2 = [theta, .], nabla theta = 0, closedness, r nabla = nabla' r."""
    samples = list(C.samples if samples is None else samples)
    report = ChainReport(C.name, tol)
    D, theta = C.nabla, C.theta
    for x in samples:
        for y in samples[:4]:
            lhs = D(x * y)
            rhs = D(x) * y
            for k, part in x.homogeneous():
                rhs = rhs + (part * D(y)).scale(sign_of(k))
            report.leibniz = max(report.leibniz, (lhs - rhs).residual())
        report.curvature = max(report.curvature, (D(D(x)) - theta.left(x) + theta.right(x)).residual())
        if C.restrict is not None and C.boundary_nabla is not None:
            r = C.restrict(D(x)) - C.boundary_nabla(C.restrict(x))
            report.restriction = max(report.restriction, r.residual())
    if theta.element is not None:
        report.nabla_theta = D(theta.element).residual()
    report.multiplier = check_multiplier(theta, D, C.trace, samples)
    trace_check = check_graded_trace(C.trace, [p for x in samples for _, p in x.homogeneous()])
    report.trace_property = trace_check.trace_violation
    K = C.kernel
    for x in samples:
        xi = x.part(C.degree - 1)
        if xi.is_zero():
            continue
        if not C.is_cycle:
            xi = xi - C.lift(C.restrict(xi))
        report.closedness = max(report.closedness, K.magnitude(C.trace(D(xi))))
    report.lift_independence = lift_independence(C)
    logger.debug("chain check %s: max residual %.3g", C.name, report.max_residual)
    return report


# unitization and the X-construction


def unitize(C: GeneralizedChain) -> GeneralizedChain:
    """Adjoin 1 and theta~ (degree 2) to Omega, and a unit to A; int~ kills theta~ powers."""
    if not isinstance(C.algebra, FiniteAlgebra):
        raise ConventionError("unitize needs a finite-dimensional algebra")
    omega = UnitizedAlgebra(C.omega, C.theta)
    algebra = unitize_algebra(C.algebra)
    rho0 = C.rho

    def rho(x: np.ndarray) -> GradedElement:
        out = omega.embed(rho0(x[1:]))
        if not algebra.kernel.is_zero(x[0]):
            out = out + omega.one().scale(x[0])
        return out

    nabla = omega.lift_derivation(C.nabla)
    theta = Multiplier.from_element(omega.theta_power(1), "theta~")
    samples = [omega.embed(x) for x in C.samples] + [omega.one(), omega.theta_power(1)]
    return GeneralizedChain(omega, algebra, rho, nabla, theta, omega.trace(C.trace), samples=samples,
                            unital=True, name=f"{C.name}~")


def _x_base(C: GeneralizedChain) -> Tuple[XMatrixAlgebra, GeneralizedChain]:
    if not C.unital or C.theta.element is None:
        logger.error("x_construction needs a unital cycle with an element curvature: %s", C.name)
        raise ConventionError("x_construction needs a unital cycle whose curvature is an element")
    omega = XMatrixAlgebra(C.omega, C.theta)
    rho0 = C.rho
    samples = []
    for x in C.samples[:6]:
        samples.append(omega.from_entries({(0, 0): x}))
        samples.append(omega.from_entries({(0, 1): x, (1, 1): x}))
    base = GeneralizedChain(omega, C.algebra, lambda a: omega.diag(rho0(a)), omega.nabla_theta(C.nabla),
                            omega.curvature(), omega.trace(C.trace), samples=samples, unital=True,
                            name=f"{C.name}_theta")
    return omega, base


def x_construction(C: GeneralizedChain) -> GeneralizedChain:
    """The plain cycle (Omega_theta, nabla_theta + ad X, int_theta) over A."""
    omega, base = _x_base(C)
    D = base.nabla.plus_inner(omega.x_symbol())
    return GeneralizedChain(omega, C.algebra, base.rho, D, Multiplier.zero(), base.trace,
                            samples=base.samples, unital=True, name=f"{C.name}_X")


# interval chains


def interval_chain(C: GeneralizedChain, zeta_terms: Sequence[Tuple[int, bool, GradedElement]],
                   length: Any = 1, orientation: str = "positive", name: Optional[str] = None,
                   cap: int = 8) -> GeneralizedChain:
    """
    The chain over Omega*([0, s]) (x) Omega with nabla^c = d (x) 1 + 1 (x) nabla + ad(zeta),
    zeta = sum t^p dt^e (x) eta_p for odd entries (p, dt?, eta_p). Its boundary is
    C(s) (+) C(0) with int' = int^c nabla^c(lift).
    """
    omega = IntervalAlgebra(C.omega, length, orientation, cap)
    s = omega.length
    zeta = omega.zero()
    for p, dt, eta in zeta_terms:
        zeta = zeta + omega.embed(eta, p, dt)
    lifted = omega.lift_derivation(C.nabla)
    nabla = lifted.plus_inner(zeta) if not zeta.is_zero() else lifted
    extra = lifted(zeta) + zeta * zeta if not zeta.is_zero() else omega.zero()
    theta0 = C.theta

    def lift_base(act: Callable[[GradedElement], GradedElement], x: GradedElement) -> GradedElement:
        out = omega.zero()
        for (p, e, _), c in x.terms.items():
            out = out + omega.embed(act(c), p, bool(e))
        return out

    def left(x: GradedElement) -> GradedElement:
        return lift_base(theta0.left, x) + extra * x

    def right(x: GradedElement) -> GradedElement:
        return lift_base(theta0.right, x) + x * extra

    element = None
    if theta0.element is not None:
        element = omega.embed(theta0.element) + extra
    elif theta0.is_zero():
        element = extra
    theta = Multiplier(left, right, element, "theta^c")

    sum_algebra = DirectSum(C.omega, C.omega)

    def restrict(x: GradedElement) -> GradedElement:
        return sum_algebra.pair(omega.evaluate(x, s), omega.evaluate(x, 0))

    def end_nabla(at: Fraction) -> Derivation:
        z = omega.evaluate(zeta, at)
        return C.nabla.plus_inner(z) if not z.is_zero() else C.nabla

    def end_theta(at: Fraction) -> Multiplier:
        if element is not None:
            return Multiplier.from_element(omega.evaluate(element, at))
        return Multiplier(lambda x: omega.evaluate(left(omega.embed(x)), at),
                          lambda x: omega.evaluate(right(omega.embed(x)), at), None, "theta'")

    def lift(x: GradedElement) -> GradedElement:
        x1 = sum_algebra.component(x, 0)
        x0 = sum_algebra.component(x, 1)
        return (omega.embed(x1, 1).scale(1 / s) + omega.embed(x0) - omega.embed(x0, 1).scale(1 / s))

    def alt_lift(x: GradedElement) -> GradedElement:
        x1 = sum_algebra.component(x, 0)
        return lift(x) + omega.embed(x1, 1).scale(s) - omega.embed(x1, 2)

    rho0 = C.rho
    samples = []
    for x in C.samples[:6]:
        samples.extend([omega.embed(x), omega.embed(x, 1), omega.embed(x, 1, True)])
    b_samples = [sum_algebra.pair(x, y) for x, y in zip(C.samples, reversed(C.samples))]
    return GeneralizedChain(
        omega, C.algebra, lambda a: omega.embed(rho0(a)), nabla, theta, omega.trace(C.trace),
        boundary_omega=sum_algebra, restrict=restrict,
        boundary_nabla=sum_algebra.sum_derivation(end_nabla(s), end_nabla(Fraction(0))),
        boundary_theta=sum_algebra.sum_multiplier(end_theta(s), end_theta(Fraction(0))),
        lift=lift, alt_lift=alt_lift, samples=samples, boundary_samples=b_samples, unital=C.unital,
        name=name or f"{C.name}^c")


def connection_variation_chain(C: GeneralizedChain, eta: GradedElement, length: Any = 1,
                               orientation: str = "positive") -> GeneralizedChain:
    """nabla_t = nabla_0 + t ad(eta), theta^c = 1 (x) theta_t + dt (x) eta; boundary C(1) - C(0)."""
    if eta.degrees() not in ([], [1]):
        logger.error("connection change of degree %s", eta.degrees())
        raise ConventionError(f"eta must have degree 1, got {eta.degrees()}")
    return interval_chain(C, [(1, False, eta)], length, orientation, f"{C.name}~var")


# theorem checks


def transgress(C: GeneralizedChain, tol: float = 0.0, **kwargs: Any) -> BBCochain:
    """Ch(C) without its (vanishing) top component, as a cochain of degree n-2."""
    ch = character(C)
    n = C.degree
    top = residual_report(BBCochain(ch.algebra, n, {n: ch.component(n)}), tol, "top component", **kwargs)
    if not top.passed:
        logger.error("top component of Ch(%s) does not vanish: %.3g", C.name, top.max_residual)
        raise ConventionError(f"top component of Ch({C.name}) is nonzero; use the S-form instead")
    comps = {k: c for k, c in ch.components.items() if k <= n - 2}
    return BBCochain(ch.algebra, n - 2, comps, f"T({C.name})")


def verify_theorem_one(C: GeneralizedChain, tol: float = 0.0, **kwargs: Any) -> ResidualReport:
    """(b+B) Ch(C) = S Ch(dC)."""
    with timed("theorem one on %s", C.name):
        lhs = bb(character(C))
        rhs = shift_S(character(boundary(C)))
        return compare(lhs, rhs, tol, label=f"theorem-1 {C.name}", **kwargs)


@dataclass
class CompReport:
    start: ResidualReport
    coboundary: ResidualReport
    top_vanishes: bool
    tol: float

    @property
    def passed(self) -> bool:
        return self.start.passed and self.coboundary.passed and self.top_vanishes

    def to_dict(self) -> Dict[str, Any]:
        return {"start": self.start.to_dict(), "coboundary": self.coboundary.to_dict(),
                "top_vanishes": self.top_vanishes, "passed": self.passed}


def theorem_comp_cobounding(C: GeneralizedChain, tol: float = 0.0,
                            **kwargs: Any) -> Tuple[BBCochain, BBCochain, GeneralizedChain]:
    """(T, tau(C_X), chain) with Ch(C) - tau(C_X) = (b+B) T."""
    omega, base = _x_base(C)
    chain = connection_variation_chain(base, omega.x_symbol())
    T = transgress(chain, tol, **kwargs).scale(-1)
    tau = connes_cycle_character(x_construction(C))
    return T, tau, chain


def verify_theorem_comp(C: GeneralizedChain, tol: float = 0.0, **kwargs: Any) -> CompReport:
    """Ch(C) - tau(C_X) - (b+B) T = 0 with T from the nabla_theta^t cobordism."""
    ch = character(C)
    _, base = _x_base(C)
    start = compare(character(base), ch, tol, label="theta-start", **kwargs)
    try:
        T, tau, _ = theorem_comp_cobounding(C, tol, **kwargs)
    except ConventionError:
        return CompReport(start, ResidualReport("theorem-comp", tol, float("inf")), False, tol)
    coboundary = compare(ch - tau, bb(T), tol, label=f"theorem-comp {C.name}", **kwargs)
    return CompReport(start, coboundary, True, tol)


# products


def product(C1: GeneralizedChain, C2: GeneralizedChain) -> GeneralizedChain:
    """(Omega1 (x)^ Omega2, nabla1 (x) 1 + 1 (x) nabla2, theta1 (x) 1 + 1 (x) theta2, int1 (x) int2)."""
    if not (C1.is_cycle and C2.is_cycle):
        raise ConventionError("product is defined on cycles")
    if C1.nabla.connection is None or C2.nabla.connection is None:
        raise BackendMismatchError("product needs connection-type derivations on form backends")
    if not isinstance(C1.algebra, FiniteAlgebra) or not isinstance(C2.algebra, FiniteAlgebra):
        raise BackendMismatchError("product needs finite-dimensional algebras")
    tp = graded_tensor_product(C1.omega, C2.omega)
    forms = tp.algebra
    connection = tp.left(C1.nabla.connection) + tp.right(C2.nabla.connection)
    nabla = Derivation(forms, forms.d_form, "d", forms.zero()).plus_inner(connection)
    parts = []
    for C, embed in ((C1, tp.left), (C2, tp.right)):
        if C.theta.element is not None:
            parts.append(embed(C.theta.element))
        elif not C.theta.is_zero():
            raise BackendMismatchError("product needs element curvatures")
    theta_el = forms.zero()
    for p in parts:
        theta_el = theta_el + p
    theta = Multiplier.from_element(theta_el) if not theta_el.is_zero() else Multiplier.zero()
    algebra = tensor(C1.algebra, C2.algebra)
    d2 = C2.algebra.dim
    images = []
    for i in range(C1.algebra.dim):
        for j in range(d2):
            images.append(tp.pure(C1.rho(C1.algebra.basis()[i]), C2.rho(C2.algebra.basis()[j])))
    samples = [tp.pure(x, y) for x in C1.samples[:4] for y in C2.samples[:4]]
    return cycle(forms, algebra, rho_from_images(images), nabla, theta, torus_trace(forms), samples,
                 name=f"{C1.name}x{C2.name}")


def trivial_cycle(kernel: Any = "exact") -> GeneralizedChain:
    """Omega = C in degree 0, int = evaluation: the unit for the product."""
    forms = MatrixForms(0, 1, kernel)
    algebra = diagonal_algebra(1, kernel)
    return cycle(forms, algebra, rho_from_images([forms.one()]), de_rham(forms), None, torus_trace(forms),
                 [forms.one()], name="point")


def matrix_form_cycle(d: int, N: int, connection: Optional[GradedElement] = None, kernel: Any = "exact",
                      rng: Optional[np.random.Generator] = None) -> GeneralizedChain:
    """
    M_N acting on constant M_N-valued forms in d generators with nabla = d + ad(A),
    theta = A^2 and the trace tr(top coefficient). A is random when not given.
    """
    forms = MatrixForms(d, N, kernel)
    K = forms.kernel
    if connection is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        connection = forms.random_element(rng, 1) if d else forms.zero()
    algebra = matrix_algebra(N, K)
    images = []
    for a in range(N):
        for b in range(N):
            E = K.zeros(N)
            E[a, b] = 1
            images.append(forms.constant(K.matrix(E)))
    theta = forms.d_form(connection) + connection * connection
    samples = images[:4] + [connection]
    return cycle(forms, algebra, rho_from_images(images), connection_derivation(forms, connection),
                 Multiplier.from_element(theta, "A^2") if not theta.is_zero() else None,
                 torus_trace(forms), samples, name=f"forms(d={d},N={N})")
