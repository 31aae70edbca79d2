"""
Crossed-product cycles for affine group actions on the torus.

The group acts on forms by pushforward (g.w)(y) = w(g^{-1} y), on End(E) by
conjugation with a constant bundle map, and on crossed-product elements by
(a'U_g')(aU_g) = a' a^g' U_gg'. Volume flows use mu(g) = e^{p^g - p}, so every
log mu, delta(g) and integrand stays in the trigonometric-polynomial ring.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
import math
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from .cyclic import (BBCochain, Cochain, ElementAlgebra, ResidualReport, bb, compare, connes_B, hochschild_b,
                     residual_report)
from .cycles import (GeneralizedChain, character, connection_variation_chain, cycle, interval_chain,
                     simplex_monomial_integral, transgress, zero_chain)
from .errors import ConventionError
from .extensions import AbelianGroup, CrossedProductAlgebra, GroupElement
from .graded import (Derivation, GradedElement, Multiplier, TorusForms, connection_derivation, de_rham,
                     torus_trace)
from .logger import logger, timed
from .utils import compositions, sign_of


@dataclass(frozen=True)
class AffineMap:
    """x -> A x + b on R^d / Z^d; A integral with det 1."""

    A: Tuple[Tuple[int, ...], ...]
    b: Tuple[Fraction, ...]

    @classmethod
    def make(cls, A: Sequence[Sequence[int]], b: Optional[Sequence[Any]] = None) -> "AffineMap":
        A = tuple(tuple(int(v) for v in row) for row in A)
        d = len(A)
        b = tuple(Fraction(v) for v in (b or [0] * d))
        if any(len(row) != d for row in A) or len(b) != d:
            raise ConventionError("affine map needs a square matrix and a matching translation")
        det = sympy.Matrix(A).det()
        if det != 1:
            raise ConventionError(f"affine maps must preserve orientation and Z^d (det = {det})")
        return cls(A, b)

    @classmethod
    def identity(cls, d: int) -> "AffineMap":
        return cls.make(np.eye(d, dtype=int).tolist())

    @property
    def d(self) -> int:
        return len(self.A)

    def compose(self, other: "AffineMap") -> "AffineMap":
        """self o other."""
        A = np.asarray(self.A, dtype=object)
        A2 = np.asarray(other.A, dtype=object)
        b = A.dot(np.asarray(other.b, dtype=object)) + np.asarray(self.b, dtype=object)
        return AffineMap(tuple(tuple(int(v) for v in row) for row in A.dot(A2)),
                         tuple(Fraction(v) % 1 for v in b))

    def inverse(self) -> "AffineMap":
        inv = sympy.Matrix(self.A).inv()
        A_inv = tuple(tuple(int(v) for v in inv.row(i)) for i in range(self.d))
        b = -np.asarray(A_inv, dtype=object).dot(np.asarray(self.b, dtype=object))
        return AffineMap(A_inv, tuple(Fraction(v) % 1 for v in b))

    def is_identity(self) -> bool:
        return self.A == tuple(tuple(int(i == j) for j in range(self.d)) for i in range(self.d)) \
            and all(v % 1 == 0 for v in self.b)


class AffineTorusAction:
    """
    An abelian group acting on T^d through one affine map per generator.

    Relations are checked on construction: finite-order generators return to
    the identity and the generators commute modulo Z^d.
    """

    def __init__(self, d: int, group: AbelianGroup, generators: Sequence[AffineMap]):
        if len(generators) != group.rank:
            raise ConventionError(f"{group.describe()} needs {group.rank} generator maps, got {len(generators)}")
        self.d = d
        self.group = group
        self.generators = list(generators)
        self._maps: Dict[GroupElement, AffineMap] = {}
        self.validate()

    def validate(self) -> None:
        for i, (g, m) in enumerate(zip(self.generators, self.group.orders)):
            if g.d != self.d:
                raise ConventionError(f"generator {i} acts on T^{g.d}, expected T^{self.d}")
            if m:
                power = AffineMap.identity(self.d)
                for _ in range(m):
                    power = power.compose(g)
                if not power.is_identity():
                    raise ConventionError(f"generator {i} does not have order dividing {m}")
        for g, h in combinations(self.generators, 2):
            if not g.compose(h).compose(h.compose(g).inverse()).is_identity():
                raise ConventionError("generator maps do not commute")

    def map_for(self, g: Sequence[int]) -> AffineMap:
        g = self.group.normalize(g)
        hit = self._maps.get(g)
        if hit is not None:
            return hit
        out = AffineMap.identity(self.d)
        for n, gen in zip(g, self.generators):
            step = gen if n >= 0 else gen.inverse()
            for _ in range(abs(n)):
                out = out.compose(step)
        self._maps[g] = out
        return out

    def act(self, g: Sequence[int], x: GradedElement, U: Optional[np.ndarray] = None,
            U_inv: Optional[np.ndarray] = None) -> GradedElement:
        """Pushforward of a torus form along the map of g."""
        m = self.map_for(g)
        A_inv = m.inverse().A
        return x.algebra.transform(x, A_inv, m.b, U, U_inv)


def rotation_action(d: int, order: int, shift: Sequence[Any]) -> AffineTorusAction:
    """Z/order acting by the translation x -> x + shift."""
    return AffineTorusAction(d, AbelianGroup.cyclic(order), [AffineMap.make(np.eye(d, dtype=int).tolist(), shift)])


def linear_action(A: Sequence[Sequence[int]], b: Optional[Sequence[Any]] = None) -> AffineTorusAction:
    """Z acting by x -> A x + b."""
    return AffineTorusAction(len(A), AbelianGroup.free(1), [AffineMap.make(A, b)])


class EquivariantBundle:
    """
    The trivial bundle C^N on T^d with connection d + A and constant bundle maps
    u per generator; delta(g) = A - A^g.
    """

    def __init__(self, action: AffineTorusAction, connection: GradedElement,
                 bundle_maps: Optional[Sequence[np.ndarray]] = None, name: str = "bundle"):
        forms = connection.algebra
        if not isinstance(forms, TorusForms) or forms.d != action.d:
            raise ConventionError("the connection must be a form on the acted torus")
        if connection.degrees() not in ([], [1]):
            raise ConventionError(f"connection form must have degree 1, got {connection.degrees()}")
        self.action = action
        self.forms = forms
        self.connection = connection
        self.name = name
        K = forms.kernel
        if bundle_maps is None:
            bundle_maps = [K.identity(forms.N) for _ in action.generators]
        self.bundle_maps = [K.matrix(u) for u in bundle_maps]
        self._inverses = [K.adjoint(u) for u in self.bundle_maps]
        for u, v in zip(self.bundle_maps, self._inverses):
            if not K.mat_is_zero(u @ v - K.identity(forms.N), 1e-12):
                raise ConventionError("bundle maps must be unitary")
        self._U: Dict[GroupElement, Tuple[np.ndarray, np.ndarray]] = {}
        self._delta: Dict[GroupElement, GradedElement] = {}

    @property
    def group(self) -> AbelianGroup:
        return self.action.group

    @property
    def N(self) -> int:
        return self.forms.N

    def U(self, g: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
        g = self.group.normalize(g)
        hit = self._U.get(g)
        if hit is not None:
            return hit
        K = self.forms.kernel
        U = K.identity(self.N)
        V = K.identity(self.N)
        for n, u, v in zip(g, self.bundle_maps, self._inverses):
            a, b = (u, v) if n >= 0 else (v, u)
            for _ in range(abs(n)):
                U = U @ a
                V = b @ V
        self._U[g] = (U, V)
        return U, V

    def act(self, g: Sequence[int], x: GradedElement) -> GradedElement:
        U, V = self.U(g)
        return self.action.act(g, x, U, V)

    def delta(self, g: Sequence[int]) -> GradedElement:
        g = self.group.normalize(g)
        hit = self._delta.get(g)
        if hit is None:
            hit = self._delta[g] = self.connection - self.act(g, self.connection)
        return hit

    def curvature(self) -> GradedElement:
        A = self.connection
        return self.forms.d_form(A) + A * A

    def nabla(self) -> Derivation:
        return connection_derivation(self.forms, self.connection)

    def with_connection(self, connection: GradedElement) -> "EquivariantBundle":
        return EquivariantBundle(self.action, connection, self.bundle_maps, f"{self.name}'")

    def check_cocycle(self, elements: Optional[Sequence[GroupElement]] = None) -> float:
        """max |delta(gh) - delta(h)^g - delta(g)| over pairs of group elements."""
        elements = list(elements or self.group.ball(1))
        worst = 0.0
        for g, h in product(elements, repeat=2):
            r = self.delta(self.group.mul(g, h)) - self.act(g, self.delta(h)) - self.delta(g)
            worst = max(worst, r.residual())
        return worst

    def check_relations(self) -> float:
        """Bundle maps respect the group relations: u_i^m = 1 and [u_i, u_j] = 0."""
        K = self.forms.kernel
        worst = 0.0
        for u, m in zip(self.bundle_maps, self.group.orders):
            if m:
                worst = max(worst, K.mat_residual(_power(u, m) - K.identity(self.N)))
        for u, v in combinations(self.bundle_maps, 2):
            worst = max(worst, K.mat_residual(u @ v - v @ u))
        return worst


def _power(M: np.ndarray, m: int) -> np.ndarray:
    out = M
    for _ in range(m - 1):
        out = out @ M
    return out



# crossed products


def scalar_crossed(action: AffineTorusAction, kernel: Any = "exact") -> CrossedProductAlgebra:
    """C^infty(T^d) x| Gamma with trigonometric-polynomial coefficients."""
    forms = TorusForms(action.d, 1, kernel)
    return CrossedProductAlgebra(forms, action.group, action.act)


def bundle_crossed(bundle: EquivariantBundle) -> CrossedProductAlgebra:
    return CrossedProductAlgebra(bundle.forms, bundle.group, bundle.act)


def crossed_sample(crossed: CrossedProductAlgebra, max_freq: int = 1,
                   elements: Optional[Sequence[GroupElement]] = None) -> List[GradedElement]:
    """Fourier modes e_f U_g, |f_i| <= max_freq, g in a ball of radius 1 (or `elements`)."""
    forms = crossed.base
    elements = list(elements or crossed.group.ball(1))
    out = []
    for f in product(range(-max_freq, max_freq + 1), repeat=forms.d):
        for g in elements:
            out.append(crossed.elem(forms.term(f, ()), g))
    return out


def scalar_algebra(crossed: CrossedProductAlgebra, sample: Optional[Sequence[GradedElement]] = None,
                   name: str = "C(T) x| G") -> ElementAlgebra:
    return ElementAlgebra(crossed, sample if sample is not None else crossed_sample(crossed), name)


def _lift_scalar(forms: TorusForms, x: GradedElement) -> GradedElement:
    """A scalar form as an End(C^N)-valued one."""
    K = forms.kernel
    I = K.identity(forms.N)
    return forms.element({key: K.scale(I, M[0, 0]) for key, M in x.terms.items()})


def _trace_form(scalars: TorusForms, x: GradedElement) -> GradedElement:
    K = scalars.kernel
    out: Dict[Any, Any] = {}
    for key, M in x.terms.items():
        out[key] = K.matrix([[K.trace(M)]])
    return scalars.element(out)


def _crossed_terms(crossed: CrossedProductAlgebra, x: GradedElement) -> List[Tuple[GroupElement, GradedElement]]:
    return [(g, crossed.coefficient(x, g)) for g in crossed.support(x)]


def crossed_cycle(bundle: EquivariantBundle, algebra: Optional[ElementAlgebra] = None) -> GeneralizedChain:
    """
    (Omega*(T^d, End E) x| Gamma, nabla, theta U_1, int) over the scalar crossed product,
    nabla(alpha U_g) = (nabla alpha + (-1)^|alpha| alpha delta(g)) U_g.
    """
    omega = bundle_crossed(bundle)
    scalars = algebra.graded if algebra is not None else scalar_crossed(bundle.action, bundle.forms.kernel)
    algebra = algebra or scalar_algebra(scalars)
    forms = bundle.forms
    nabla = omega.derivation(bundle.nabla(), bundle.delta)
    theta = omega.elem(bundle.curvature())

    def rho(x: GradedElement) -> GradedElement:
        out = omega.zero()
        for g, a in _crossed_terms(x.algebra, x):
            out = out + omega.elem(_lift_scalar(forms, a), g)
        return out

    samples = [rho(x) for x in algebra.basis()[:4]] + [omega.elem(bundle.connection)]
    return cycle(omega, algebra, rho, nabla, Multiplier.from_element(theta, "theta U_1"),
                 omega.trace(torus_trace(forms)), samples, True, f"crossed({bundle.name})")


def chi_character(bundle: EquivariantBundle, algebra: Optional[ElementAlgebra] = None) -> BBCochain:
    """chi: the character of the crossed cycle on the scalar crossed product."""
    return character(crossed_cycle(bundle, algebra))


def quillen_cocycle(bundle: EquivariantBundle, sample: Optional[Sequence[GradedElement]] = None) -> BBCochain:
    """Character of (Omega*(T^d, End E), nabla, theta, int tr) over scalar functions; trivial group only."""
    if bundle.group.rank and any(not m.is_identity() for m in bundle.action.generators):
        raise ConventionError("the Quillen cocycle is defined for the trivial group")
    forms = bundle.forms
    scalars = TorusForms(forms.d, 1, forms.kernel)
    sample = list(sample) if sample is not None else scalars.basis_elements(0, 1)
    algebra = ElementAlgebra(scalars, sample, "C(T)")
    C = cycle(forms, algebra, lambda a: _lift_scalar(forms, a), bundle.nabla(),
              Multiplier.from_element(bundle.curvature()), torus_trace(forms),
              [_lift_scalar(forms, a) for a in sample[:4]] + [bundle.connection], True, f"quillen({bundle.name})")
    return character(C)


def quillen_collapse(bundle: EquivariantBundle, sample: Optional[Sequence[GradedElement]] = None) -> BBCochain:
    """(1/k!) int a0 da1 .. dak tr e^{-theta}, the degree-(d-k) part of tr e^{-theta} only."""
    forms = bundle.forms
    K = forms.kernel
    scalars = TorusForms(forms.d, 1, K)
    sample = list(sample) if sample is not None else scalars.basis_elements(0, 1)
    algebra = ElementAlgebra(scalars, sample, "C(T)")
    theta = bundle.curvature()
    d = forms.d
    powers = [forms.one()]
    for _ in range(d // 2):
        powers.append(powers[-1] * theta)
    comps = {}
    for k in range(d % 2, d + 1, 2):
        j = (d - k) // 2
        density = _trace_form(scalars, powers[j]).scale(Fraction(sign_of(j), math.factorial(j) * math.factorial(k)))

        def fn(args: Tuple[Any, ...], density=density) -> Any:
            w = args[0]
            for a in args[1:]:
                w = w * scalars.d_form(a)
            return scalars.integrate(w * density)

        comps[k] = Cochain(algebra, k, fn, None, f"quillen-collapse^{k}")
    return BBCochain(algebra, d, comps, f"quillen-collapse({bundle.name})")


def _expansions(crossed: CrossedProductAlgebra, args: Sequence[GradedElement]
                ) -> Iterator[Tuple[List[GroupElement], List[GradedElement]]]:
    """Multilinear expansion of crossed arguments into (g_l, a_l) with g_0 .. g_k = 1."""
    group = crossed.group
    for combo in product(*[_crossed_terms(crossed, x) for x in args]):
        gs = [g for g, _ in combo]
        if group.is_identity(group.product(gs)):
            yield gs, [a for _, a in combo]


def _gammas(group: AbelianGroup, gs: Sequence[GroupElement]) -> List[GroupElement]:
    """gamma_l = g_0 .. g_{l-1} for l = 0 .. k+1."""
    out = [group.identity()]
    for g in gs:
        out.append(group.mul(out[-1], g))
    return out


def chi_direct(bundle: EquivariantBundle, algebra: Optional[ElementAlgebra] = None) -> BBCochain:
    """
    chi^k as the sum over subsets S of {1..k} of

        int tr a0 e^{-t0 theta^g1} F_1 e^{-t1 theta^g2} .. F_k e^{-tk theta}

    with F_l = a_l^gl delta(g_l)^gl for l in S and (da_l)^gl otherwise
    (gl = g_0 .. g_{l-1}), the simplex integrals expanded by monomials.
    """
    forms = bundle.forms
    K = forms.kernel
    scalars = algebra.graded if algebra is not None else scalar_crossed(bundle.action, K)
    algebra = algebra or scalar_algebra(scalars)
    group = bundle.group
    theta = bundle.curvature()
    d = forms.d
    trace = torus_trace(forms)

    def weights(j: int, k: int) -> List[Tuple[Tuple[int, ...], Any]]:
        out = []
        for powers in compositions(j, k + 1):
            w = simplex_monomial_integral(powers)
            for i in powers:
                w *= Fraction(sign_of(i), math.factorial(i))
            out.append((powers, K.scalar(w)))
        return out

    comps = {}
    for k in range(d % 2, d + 1, 2):
        j = (d - k) // 2
        terms = weights(j, k)

        def fn(args: Tuple[Any, ...], k=k, j=j, terms=terms) -> Any:
            total = K.zero()
            for gs, as_ in _expansions(scalars, args):
                gam = _gammas(group, gs)
                thetas = [bundle.act(gam[l], theta) for l in range(1, k + 1)] + [theta]
                lifted = [bundle.act(gam[l], _lift_scalar(forms, as_[l])) for l in range(k + 1)]
                plain = [forms.d_form(x) for x in lifted]
                with_delta = [lifted[l] * bundle.act(gam[l], bundle.delta(gs[l])) if l else None
                              for l in range(k + 1)]
                for mask in product((False, True), repeat=k):
                    factors = [with_delta[l] if mask[l - 1] else plain[l] for l in range(1, k + 1)]
                    for powers, w in terms:
                        word = lifted[0]
                        for _ in range(powers[0]):
                            word = word * thetas[0]
                        for l in range(1, k + 1):
                            word = word * factors[l - 1]
                            for _ in range(powers[l]):
                                word = word * thetas[l]
                        total = total + trace(word) * w
            return total

        comps[k] = Cochain(algebra, k, fn, None, f"chi^{k}({bundle.name})")
    return BBCochain(algebra, d, comps, f"chi({bundle.name})")


def verify_connection_change(bundle: EquivariantBundle, connection: GradedElement,
                             algebra: Optional[ElementAlgebra] = None, tol: float = 0.0,
                             **kwargs: Any) -> ResidualReport:
    """chi_A' - chi_A = (b+B) T for the variation chain along eta = A' - A."""
    other = bundle.with_connection(connection)
    C = crossed_cycle(bundle, algebra)
    algebra = C.algebra
    eta = C.omega.elem(connection - bundle.connection)
    with timed("connection change on %s", bundle.name):
        T = transgress(connection_variation_chain(C, eta))
        diff = character(crossed_cycle(other, algebra)) - character(C)
        return compare(bb(T), diff, tol, label=f"connection change {bundle.name}", **kwargs)


# volume flows


class VolumeFlowData:
    """
    Volume form e^p dx on T^n under an affine action: mu(g) = e^{p^g - p},
    log mu(g) = p^g - p and delta(g) = d log mu(g). The connection on the top
    exterior power is flat.
    """

    def __init__(self, action: AffineTorusAction, p: Dict[Sequence[int], Any], kernel: Any = "exact",
                 name: str = "flow"):
        self.action = action
        self.forms = TorusForms(action.d, 1, kernel)
        self.crossed = CrossedProductAlgebra(self.forms, action.group, action.act)
        self.p = self.forms.function({tuple(f): c for f, c in p.items()})
        self.name = name
        self._log_mu: Dict[GroupElement, GradedElement] = {}

    @property
    def n(self) -> int:
        return self.action.d

    @property
    def group(self) -> AbelianGroup:
        return self.action.group

    def log_mu(self, g: Sequence[int]) -> GradedElement:
        g = self.group.normalize(g)
        hit = self._log_mu.get(g)
        if hit is None:
            hit = self._log_mu[g] = self.action.act(g, self.p) - self.p
        return hit

    def delta(self, g: Sequence[int]) -> GradedElement:
        return self.forms.d_form(self.log_mu(g))

    def mu_power(self, g: Sequence[int], t: Any = 1) -> GradedElement:
        """mu(g)^t as a tagged exponential."""
        coeffs = {f: M[0, 0] for (f, I, q), M in self.log_mu(g).terms.items()}
        return self.forms.exp_tag(coeffs, Fraction(t))

    def eta(self) -> GradedElement:
        """-dp U_1: conjugating d by e^{tp} gives d + t ad(eta)."""
        return self.crossed.elem(self.forms.d_form(self.p).scale(-1))

    def volume_bundle(self) -> EquivariantBundle:
        """The top exterior power trivialized by e^p dx: connection -dp, delta(g) = d log mu(g)."""
        return EquivariantBundle(self.action, self.forms.d_form(self.p).scale(-1), name=f"vol({self.name})")

    def sample(self, max_freq: int = 1, elements: Optional[Sequence[GroupElement]] = None) -> ElementAlgebra:
        return scalar_algebra(self.crossed, crossed_sample(self.crossed, max_freq, elements), f"{self.name} sample")

    def check_mu(self, elements: Optional[Sequence[GroupElement]] = None, word_length: int = 3) -> Dict[str, float]:
        """Cocycle law, delta = d log mu, and the telescoping product at every word of the given length."""
        group = self.group
        elements = list(elements or group.ball(1))
        cocycle = 0.0
        for g, h in product(elements, repeat=2):
            r = self.log_mu(group.mul(g, h)) - self.action.act(g, self.log_mu(h)) - self.log_mu(g)
            cocycle = max(cocycle, r.residual())
        exp_law = 0.0
        telescoping = 0.0
        for word in product(elements, repeat=word_length):
            gam = _gammas(group, word)
            acc = self.forms.one()
            for g, c in zip(word, gam):
                acc = acc * self.action.act(c, self.mu_power(g))
            r = acc - self.mu_power(group.product(word))
            telescoping = max(telescoping, r.residual())
        for g in elements:
            r = self.forms.d_form(self.mu_power(g)) - self.delta(g) * self.mu_power(g)
            exp_law = max(exp_law, r.residual())
        return {"cocycle": cocycle, "telescoping": telescoping, "dlog": exp_law}


def flow_cycle(data: VolumeFlowData, t: Any, algebra: Optional[ElementAlgebra] = None) -> GeneralizedChain:
    """Phi_t in conjugated form: (Omega*(T^n) x| Gamma, d + t ad(eta), id, int), flat."""
    omega = data.crossed
    algebra = algebra or data.sample()
    t = Fraction(t)
    nabla = omega.derivation(de_rham(data.forms), lambda g: data.forms.zero())
    if t:
        nabla = nabla.plus_inner(data.eta(), t)
    samples = list(algebra.basis()[:4]) + [data.eta()]
    return cycle(omega, algebra, lambda x: x, nabla, Multiplier.zero(),
                 omega.trace(torus_trace(data.forms)), samples, True, f"Phi_{t}({data.name})")


def literal_flow_cycle(data: VolumeFlowData, t: Any, algebra: Optional[ElementAlgebra] = None) -> GeneralizedChain:
    """Phi_t with rho_t(aU_g) = a mu(g)^t U_g and the plain differential."""
    omega = data.crossed
    algebra = algebra or data.sample()
    t = Fraction(t)

    def rho(x: GradedElement) -> GradedElement:
        out = omega.zero()
        for g, a in _crossed_terms(omega, x):
            out = out + omega.elem(a * data.mu_power(g, t), g)
        return out

    nabla = omega.derivation(de_rham(data.forms), lambda g: data.forms.zero())
    return cycle(omega, algebra, rho, nabla, Multiplier.zero(), omega.trace(torus_trace(data.forms)),
                 [rho(x) for x in algebra.basis()[:4]], True, f"Phi'_{t}({data.name})")


def gv_flow_cycles(data: VolumeFlowData, t: Any,
                   algebra: Optional[ElementAlgebra] = None) -> Tuple[GeneralizedChain, BBCochain]:
    C = flow_cycle(data, t, algebra)
    return C, character(C)


def gv_cobordism(data: VolumeFlowData, s: Any, algebra: Optional[ElementAlgebra] = None) -> GeneralizedChain:
    """
    Psi_s over Omega*([0, s]) (x) (Omega*(T^n) x| Gamma): the interval chain with
    zeta = t (x) eta - dt (x) p, whose boundary is Phi_s - Phi_0. Psi_0 is the zero chain.
    """
    s = Fraction(s)
    base = flow_cycle(data, 0, algebra)
    if s == 0:
        return zero_chain(base.algebra, base.degree + 1, base.kernel, f"Psi_0({data.name})")
    minus_p = data.crossed.elem(data.p.scale(-1))
    return interval_chain(base, [(1, False, data.eta()), (0, True, minus_p)], s, "positive",
                          f"Psi_{s}({data.name})", cap=max(8, data.n + 3))


def _interpolate(values: Sequence[Cochain], nodes: Sequence[int], powers: Sequence[int]) -> List[Cochain]:
    """Coefficients c_p with values[i] = sum_p nodes[i]^p c_p, solved exactly."""
    V = sympy.Matrix([[sympy.Integer(x) ** p for p in powers] for x in nodes])
    inv = V.inv()
    out = []
    for r in range(len(powers)):
        acc = None
        for i, v in enumerate(values):
            c = Fraction(str(inv[r, i]))
            if c == 0:
                continue
            term = v.scale(c)
            acc = term if acc is None else acc + term
        out.append(acc if acc is not None else values[0].scale(0))
    return out


def gv_p_cocycles(data: VolumeFlowData, algebra: Optional[ElementAlgebra] = None,
                  extra_nodes: int = 0) -> List[Cochain]:
    """p_0 .. p_n (and any extra coefficients) from Ch(Phi_t) at t = 0, 1, ..."""
    algebra = algebra or data.sample()
    n = data.n
    nodes = list(range(n + 1 + extra_nodes))
    values = [character(flow_cycle(data, t, algebra)).component(n) for t in nodes]
    return _interpolate(values, nodes, nodes)


def gv_q_cochains(data: VolumeFlowData, algebra: Optional[ElementAlgebra] = None) -> List[Cochain]:
    """q_1 .. q_{n+1} from Ch(Psi_s) at s = 1 .. n+1 (the constant term is zero)."""
    algebra = algebra or data.sample()
    n = data.n
    nodes = list(range(1, n + 2))
    values = [character(gv_cobordism(data, s, algebra)).component(n + 1) for s in nodes]
    return _interpolate(values, nodes, nodes)


def p_direct(data: VolumeFlowData, j: int, algebra: Optional[ElementAlgebra] = None) -> Cochain:
    """
    p_j(a0U_g0, .., anU_gn) = 1/n! sum_{|S| = j} int a0 F_1 .. F_n, with
    F_m = a_m^gm delta(g_m)^gm for m in S and (da_m)^gm otherwise.
    """
    algebra = algebra or data.sample()
    n = data.n
    forms = data.forms
    act = data.action.act
    group = data.group
    K = forms.kernel
    coef = K.scalar(Fraction(1, math.factorial(n)))

    def fn(args: Tuple[Any, ...]) -> Any:
        total = K.zero()
        for gs, as_ in _expansions(data.crossed, args):
            gam = _gammas(group, gs)
            moved = [act(gam[m], as_[m]) for m in range(n + 1)]
            for S in combinations(range(1, n + 1), j):
                word = moved[0]
                for m in range(1, n + 1):
                    if m in S:
                        word = word * moved[m] * act(gam[m], data.delta(gs[m]))
                    else:
                        word = word * forms.d_form(moved[m])
                total = total + forms.integrate(word)
        return total * coef

    return Cochain(algebra, n, fn, None, f"p_{j}({data.name})")


def q_direct(data: VolumeFlowData, j: int, algebra: Optional[ElementAlgebra] = None) -> Cochain:
    """
    q_j(a0U_g0, .., a_{n+1}U_{g_{n+1}}) = 1/(n+1)! sum_{|T| = j} 1/j sum_{l in T} (-1)^(l-1)
    int a0 F_1 .. F_{n+1}, with F_l = (a_l log mu(g_l))^gl, F_m = a_m^gm delta(g_m)^gm
    for the other m in T and (da_m)^gm outside T.
    """
    if j < 1:
        raise ConventionError("q_j is defined for j >= 1")
    algebra = algebra or data.sample()
    n = data.n
    forms = data.forms
    act = data.action.act
    group = data.group
    K = forms.kernel
    coef = K.scalar(Fraction(1, math.factorial(n + 1) * j))

    def fn(args: Tuple[Any, ...]) -> Any:
        total = K.zero()
        for gs, as_ in _expansions(data.crossed, args):
            gam = _gammas(group, gs)
            moved = [act(gam[m], as_[m]) for m in range(n + 2)]
            for T in combinations(range(1, n + 2), j):
                for l in T:
                    word = moved[0]
                    for m in range(1, n + 2):
                        if m == l:
                            word = word * moved[m] * act(gam[m], data.log_mu(gs[m]))
                        elif m in T:
                            word = word * moved[m] * act(gam[m], data.delta(gs[m]))
                        else:
                            word = word * forms.d_form(moved[m])
                    v = forms.integrate(word)
                    total = total + v if l % 2 else total - v
        return total * coef

    return Cochain(algebra, n + 1, fn, None, f"q_{j}({data.name})")


def _single(c: Cochain) -> BBCochain:
    return BBCochain(c.algebra, c.degree, {c.degree: c}, c.name)


def _cyclic_defect(c: Cochain) -> Cochain:
    """phi(a_k, a_0, .., a_{k-1}) - (-1)^k phi(a_0, .., a_k)."""
    k = c.degree

    def fn(args: Tuple[Any, ...]) -> Any:
        v = c(args[-1], *args[:-1])
        w = c(*args)
        return v - w if k % 2 == 0 else v + w

    return Cochain(c.algebra, k, fn, None, f"lambda({c.name})")


@dataclass
class GVReport:
    name: str
    reports: List[ResidualReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def max_residual(self) -> float:
        return max((r.max_residual for r in self.reports), default=0.0)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "max_residual": self.max_residual,
                "reports": [r.to_dict() for r in self.reports]}


def verify_gv_relations(data: VolumeFlowData, algebra: Optional[ElementAlgebra] = None, tol: float = 0.0,
                        **kwargs: Any) -> GVReport:
    """B q_j = p_j and b q_j = 0 for j = 1..n; B q_{n+1} = b q_{n+1} = 0 and q_{n+1} is cyclic."""
    algebra = algebra or data.sample()
    n = data.n
    report = GVReport(f"gv-relations {data.name}")
    with timed("gv relations on %s", data.name):
        ps = gv_p_cocycles(data, algebra)
        qs = gv_q_cochains(data, algebra)
        for j in range(1, n + 2):
            q = qs[j - 1]
            Bq = connes_B(q)
            target = _single(Bq - ps[j]) if j <= n else _single(Bq)
            report.reports.append(residual_report(target, tol, f"B q_{j} - p_{j}" if j <= n else f"B q_{j}",
                                                  **kwargs))
            report.reports.append(residual_report(_single(hochschild_b(q)), tol, f"b q_{j}", **kwargs))
        report.reports.append(residual_report(_single(_cyclic_defect(qs[n])), tol, f"cyclicity q_{n + 1}",
                                              **kwargs))
    logger.info("%s: passed=%s max residual %.3g", report.name, report.passed, report.max_residual)
    return report


def verify_gv_direct(data: VolumeFlowData, algebra: Optional[ElementAlgebra] = None, tol: float = 0.0,
                     **kwargs: Any) -> GVReport:
    """Interpolated p_j, q_j against the direct formulas, and the degree bound of Ch(Phi_t) in t."""
    algebra = algebra or data.sample()
    n = data.n
    report = GVReport(f"gv-direct {data.name}")
    ps = gv_p_cocycles(data, algebra, extra_nodes=1)
    for j in range(n + 1):
        report.reports.append(residual_report(_single(ps[j] - p_direct(data, j, algebra)), tol,
                                              f"p_{j} direct", **kwargs))
    report.reports.append(residual_report(_single(ps[n + 1]), tol, f"t^{n + 1} coefficient", **kwargs))
    qs = gv_q_cochains(data, algebra)
    for j in range(1, n + 2):
        report.reports.append(residual_report(_single(qs[j - 1] - q_direct(data, j, algebra)), tol,
                                              f"q_{j} direct", **kwargs))
    return report


def verify_prop_flow_equality(data: VolumeFlowData, algebra: Optional[ElementAlgebra] = None, tol: float = 0.0,
                              **kwargs: Any) -> GVReport:
    """Ch(Phi_1) = Ch(C) for the volume bundle, and the literal rho_1 form agrees with the conjugated one."""
    algebra = algebra or data.sample()
    report = GVReport(f"flow-equality {data.name}")
    flow = character(flow_cycle(data, 1, algebra))
    report.reports.append(compare(flow, chi_character(data.volume_bundle(), algebra), tol,
                                  label="Ch(Phi_1) vs Ch(C)", **kwargs))
    report.reports.append(compare(flow, character(literal_flow_cycle(data, 1, algebra)), tol,
                                  label="conjugated vs literal flow", **kwargs))
    return report
