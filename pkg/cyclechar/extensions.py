"""
Algebras built on top of another graded algebra.

    CrossedProductAlgebra  base x| Gamma, (a'U_g')(aU_g) = a' a^g' U_gg'
    IntervalAlgebra        Omega*([0, s]) (x) base, polynomial in t
    XMatrixAlgebra         2x2 matrices over base with middle factor diag(1, theta)
    UnitizedAlgebra        base + C[theta~] (formal unit and curvature)
    DirectSum              base_0 (+) base_1 (boundaries of interval chains)

plus graded tensor products of form backends and the group descriptor used
by crossed products.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .errors import BackendMismatchError, ConventionError
from .graded import (Derivation, GradedAlgebra, GradedElement, GradedTrace, MatrixForms,
                     Multiplier, NestedAlgebra, TorusForms)
from .logger import logger
from .utils import sign_of

GroupElement = Tuple[int, ...]


class AbelianGroup:
    """Product of cyclic factors; order 0 stands for a copy of Z."""

    def __init__(self, orders: Sequence[int]):
        self.orders = tuple(int(m) for m in orders)
        if any(m < 0 for m in self.orders):
            raise ConventionError(f"group orders must be >= 0: {self.orders}")

    @classmethod
    def cyclic(cls, m: int) -> "AbelianGroup":
        return cls((m,))

    @classmethod
    def free(cls, r: int) -> "AbelianGroup":
        return cls((0,) * r)

    @property
    def rank(self) -> int:
        return len(self.orders)

    def normalize(self, g: Sequence[int]) -> GroupElement:
        return tuple(int(v) % m if m else int(v) for v, m in zip(g, self.orders))

    def identity(self) -> GroupElement:
        return (0,) * self.rank

    def is_identity(self, g: GroupElement) -> bool:
        return not any(self.normalize(g))

    def mul(self, g: GroupElement, h: GroupElement) -> GroupElement:
        return self.normalize(tuple(a + b for a, b in zip(g, h)))

    def inv(self, g: GroupElement) -> GroupElement:
        return self.normalize(tuple(-a for a in g))

    def product(self, word: Iterable[GroupElement]) -> GroupElement:
        out = self.identity()
        for g in word:
            out = self.mul(out, g)
        return out

    def generators(self) -> List[GroupElement]:
        gens = []
        for i in range(self.rank):
            g = [0] * self.rank
            g[i] = 1
            gens.append(self.normalize(g))
        return gens

    def ball(self, radius: int = 1) -> List[GroupElement]:
        """Elements with every free coordinate in [-radius, radius]."""
        ranges = [range(m) if m else range(-radius, radius + 1) for m in self.orders]
        return sorted({self.normalize(g) for g in product(*ranges)})

    def describe(self) -> str:
        return " x ".join(f"Z/{m}" if m else "Z" for m in self.orders) or "1"


class CrossedProductAlgebra(NestedAlgebra):
    """
    base x| Gamma with key (g, k) and a homogeneous degree-k base coefficient.

    `action(g, a)` is a left action by graded automorphisms:
    action(h, action(g, a)) == action(h*g, a). With this convention the
    product law (a'U_g')(aU_g) = a' a^g' U_{g g'} is associative.
    """

    kind = "crossed"

    def __init__(self, base: GradedAlgebra, group: AbelianGroup,
                 action: Callable[[GroupElement, GradedElement], GradedElement]):
        super().__init__(base)
        self.group = group
        self.action = action

    def signature(self) -> Tuple[Any, ...]:
        return (self.kind, self.base.signature(), self.group.orders, id(self))

    def key_degree(self, key: Any) -> int:
        return key[1]

    def mul_terms(self, k1: Any, c1: GradedElement, k2: Any, c2: GradedElement):
        g1, d1 = k1
        g2, d2 = k2
        return (((self.group.mul(g2, g1), d1 + d2), c1 * self.action(g1, c2)),)

    def elem(self, a: GradedElement, g: Optional[Sequence[int]] = None) -> GradedElement:
        g = self.group.identity() if g is None else self.group.normalize(g)
        return self.element({(g, k): part for k, part in a.homogeneous()})

    def one(self) -> GradedElement:
        return self.elem(self.base.one())

    def unit_symbol(self, g: Sequence[int]) -> GradedElement:
        return self.elem(self.base.one(), g)

    def coefficient(self, x: GradedElement, g: Sequence[int]) -> GradedElement:
        g = self.group.normalize(g)
        out = self.base.zero()
        for (h, _), c in x.terms.items():
            if h == g:
                out = out + c
        return out

    def support(self, x: GradedElement) -> List[GroupElement]:
        return sorted({h for h, _ in x.terms})

    def trace(self, base_trace: GradedTrace) -> GradedTrace:
        """alpha U_g -> int alpha when g = 1, else 0."""
        e = self.group.identity()
        return GradedTrace(base_trace.degree, lambda x: base_trace(self.coefficient(x, e)),
                           base_trace.kernel, f"crossed({base_trace.name})")

    def derivation(self, base_nabla: Derivation,
                   delta: Callable[[GroupElement], GradedElement]) -> Derivation:
        """nabla(alpha U_g) = (nabla alpha + (-1)^|alpha| alpha delta(g)) U_g."""

        def action(x: GradedElement) -> GradedElement:
            out = self.zero()
            for (g, k), a in x.terms.items():
                out = out + self.elem(base_nabla(a) + (a * delta(g)).scale(sign_of(k)), g)
            return out

        return Derivation(self, action, f"crossed({base_nabla.name})")

    def apply(self, g: Sequence[int], x: GradedElement) -> GradedElement:
        """Conjugation U_g x U_g^{-1}, used to check the action on crossed elements."""
        u = self.unit_symbol(g)
        return u * x * self.unit_symbol(self.group.inv(self.group.normalize(g)))


class IntervalAlgebra(NestedAlgebra):
    """
    Omega*([0, s]) (x) base. Key (p, e, k) is t^p dt^e (x) omega with
    deg omega = k; dt sits on the left and is odd.

    Trace orientation:
        graded    int^c (alpha (x) omega) = (-1)^n int omega int alpha
        positive  int^c (alpha (x) omega) = int omega int alpha
    """

    kind = "interval"

    def __init__(self, base: GradedAlgebra, length: Any = 1, orientation: str = "graded",
                 cap: int = 8):
        super().__init__(base)
        if orientation not in ("graded", "positive"):
            raise ConventionError(f"unknown interval orientation: {orientation}")
        self.length = Fraction(length)
        if self.length <= 0:
            raise ConventionError(f"interval length must be positive, got {length}")
        self.orientation = orientation
        self.cap = cap

    def signature(self) -> Tuple[Any, ...]:
        return (self.kind, self.base.signature(), self.length, self.orientation)

    def key_degree(self, key: Any) -> int:
        return key[1] + key[2]

    def mul_terms(self, k1: Any, c1: GradedElement, k2: Any, c2: GradedElement):
        p, e, k = k1
        q, f, l = k2
        if e + f > 1:
            return ()
        if p + q > self.cap:
            logger.error("t-degree %d exceeds interval cap %d", p + q, self.cap)
            raise ConventionError(f"t-polynomial degree {p + q} exceeds the cap {self.cap}")
        c = c1 * c2
        if k * f % 2:
            c = -c
        return (((p + q, e + f, k + l), c),)

    def embed(self, a: GradedElement, power: int = 0, dt: bool = False) -> GradedElement:
        e = 1 if dt else 0
        return self.element({(power, e, k): part for k, part in a.homogeneous()})

    def one(self) -> GradedElement:
        return self.embed(self.base.one())

    def t(self, power: int = 1) -> GradedElement:
        return self.embed(self.base.one(), power)

    def dt(self) -> GradedElement:
        return self.embed(self.base.one(), 0, True)

    def d_interval(self, x: GradedElement) -> GradedElement:
        out = self.zero()
        for (p, e, k), a in x.terms.items():
            if e == 0 and p > 0:
                out = out + self.element({(p - 1, 1, k): a.scale(p)})
        return out

    def lift_derivation(self, nabla: Derivation, name: Optional[str] = None) -> Derivation:
        """d (x) 1 + 1 (x) nabla."""

        def action(x: GradedElement) -> GradedElement:
            out = self.d_interval(x)
            for (p, e, k), a in x.terms.items():
                out = out + self.embed(nabla(a).scale(sign_of(e)), p, bool(e))
            return out

        return Derivation(self, action, name or f"interval({nabla.name})")

    def evaluate(self, x: GradedElement, at: Any) -> GradedElement:
        """Restriction to the endpoint t = at; dt parts vanish."""
        at = Fraction(at)
        out = self.base.zero()
        for (p, e, k), a in x.terms.items():
            if e == 0:
                out = out + a.scale(at ** p)
        return out

    def trace(self, base_trace: GradedTrace) -> GradedTrace:
        n = base_trace.degree
        sign = sign_of(n) if self.orientation == "graded" else 1
        s = self.length

        def functional(x: GradedElement) -> Any:
            K = base_trace.kernel
            total = K.zero()
            for (p, e, k), a in x.terms.items():
                if e == 1 and k == n:
                    total = total + base_trace(a) * K.scalar(s ** (p + 1) / (p + 1) * sign)
            return total

        return GradedTrace(n + 1, functional, base_trace.kernel, f"interval({base_trace.name})")


def interval_extend(base: GradedAlgebra, length: Any = 1, orientation: str = "graded",
                    cap: int = 8) -> IntervalAlgebra:
    return IntervalAlgebra(base, length, orientation, cap)


class XMatrixAlgebra(NestedAlgebra):
    """
    2x2 matrices over a unital base with the product w . diag(1, theta) . w'.

    Key (i, j, k): entry (i, j) of a degree-k element, whose coefficient has
    degree k - i - j.
    """

    kind = "x-matrix"

    def __init__(self, base: GradedAlgebra, theta: Multiplier):
        super().__init__(base)
        self.theta = theta

    def signature(self) -> Tuple[Any, ...]:
        return (self.kind, self.base.signature(), id(self))

    def key_degree(self, key: Any) -> int:
        return key[2]

    def mul_terms(self, k1: Any, c1: GradedElement, k2: Any, c2: GradedElement):
        i, l, a = k1
        l2, j, b = k2
        if l != l2:
            return ()
        left = c1 if l == 0 else self.theta.right(c1)
        return (((i, j, a + b), left * c2),)

    def from_entries(self, entries: Dict[Tuple[int, int], GradedElement]) -> GradedElement:
        terms = {}
        for (i, j), a in entries.items():
            for m, part in a.homogeneous():
                terms[(i, j, m + i + j)] = part
        return self.element(terms)

    def entry(self, x: GradedElement, i: int, j: int) -> GradedElement:
        out = self.base.zero()
        for (a, b, _), c in x.terms.items():
            if (a, b) == (i, j):
                out = out + c
        return out

    unital = False

    def diag(self, a: GradedElement) -> GradedElement:
        return self.from_entries({(0, 0): a})

    def x_symbol(self) -> GradedElement:
        """X = [[0, -1], [1, 0]], of degree 1."""
        one = self.base.one()
        return self.from_entries({(0, 1): -one, (1, 0): one})

    def curvature(self) -> Multiplier:
        """diag(theta, 1), acting entrywise through theta's actions."""
        theta = self.theta

        def left(x: GradedElement) -> GradedElement:
            return self.element({k: theta.left(c) for k, c in _shift(x, 2).items()})

        def right(x: GradedElement) -> GradedElement:
            return self.element({k: theta.right(c) for k, c in _shift(x, 2).items()})

        element = None
        if theta.element is not None:
            element = self.from_entries({(0, 0): theta.element, (1, 1): self.base.one()})
        return Multiplier(left, right, element, "diag(theta,1)")

    def nabla_theta(self, nabla: Derivation) -> Derivation:
        """Entrywise [[nabla, nabla], [-nabla, -nabla]]."""

        def action(x: GradedElement) -> GradedElement:
            terms: Dict[Any, GradedElement] = {}
            for (i, j, k), c in x.terms.items():
                terms[(i, j, k + 1)] = nabla(c).scale(sign_of(i))
            return self.element(terms)

        return Derivation(self, action, f"x({nabla.name})")

    def trace(self, base_trace: GradedTrace) -> GradedTrace:
        """int_theta w = int w11 - (-1)^deg w int w22 theta."""
        n = base_trace.degree

        def functional(x: GradedElement) -> Any:
            top = self.entry(x, 0, 0)
            low = self.entry(x, 1, 1)
            return base_trace(top) - base_trace(self.theta.right(low)) * sign_of(n)

        return GradedTrace(n, functional, base_trace.kernel, f"x({base_trace.name})")


def _shift(x: GradedElement, by: int) -> Dict[Any, GradedElement]:
    return {(i, j, k + by): c for (i, j, k), c in x.terms.items()}


class UnitizedAlgebra(NestedAlgebra):
    """
    Omega~ = Omega + C[theta~] for a curvature given as a multiplier.

    Keys ("w", k) carry base elements; keys ("t", j) carry the scalar
    coefficient of theta~^j (j = 0 is the adjoined unit).
    """

    kind = "unitized"

    def __init__(self, base: GradedAlgebra, theta: Multiplier):
        super().__init__(base)
        self.theta = theta

    def signature(self) -> Tuple[Any, ...]:
        return (self.kind, self.base.signature(), id(self))

    def key_degree(self, key: Any) -> int:
        return key[1] if key[0] == "w" else 2 * key[1]

    def cscale(self, c: Any, s: Any) -> Any:
        return c.scale(s) if isinstance(c, GradedElement) else c * s

    def cis_zero(self, c: Any) -> bool:
        return c.is_zero() if isinstance(c, GradedElement) else self.kernel.is_zero(c)

    def _theta_power(self, x: GradedElement, j: int, side: str) -> GradedElement:
        act = self.theta.left if side == "left" else self.theta.right
        for _ in range(j):
            x = act(x)
        return x

    def mul_terms(self, k1: Any, c1: Any, k2: Any, c2: Any):
        (s1, a), (s2, b) = k1, k2
        if s1 == "w" and s2 == "w":
            return ((("w", a + b), c1 * c2),)
        if s1 == "t" and s2 == "t":
            return ((("t", a + b), c1 * c2),)
        if s1 == "t":
            return ((("w", b + 2 * a), self._theta_power(c2, a, "left").scale(c1)),)
        return ((("w", a + 2 * b), self._theta_power(c1, b, "right").scale(c2)),)

    def embed(self, a: GradedElement) -> GradedElement:
        return self.element({("w", k): part for k, part in a.homogeneous()})

    def theta_power(self, j: int, coeff: Any = 1) -> GradedElement:
        return self.element({("t", j): self.kernel.scalar(coeff)})

    def one(self) -> GradedElement:
        return self.theta_power(0)

    def base_part(self, x: GradedElement) -> GradedElement:
        out = self.base.zero()
        for (s, _), c in x.terms.items():
            if s == "w":
                out = out + c
        return out

    def lift_derivation(self, nabla: Derivation) -> Derivation:
        """nabla~ kills the unit and theta~."""
        return Derivation(self, lambda x: self.embed(nabla(self.base_part(x))),
                          f"unitized({nabla.name})")

    def trace(self, base_trace: GradedTrace) -> GradedTrace:
        """Extends the base trace and kills pure theta~ powers."""
        return GradedTrace(base_trace.degree, lambda x: base_trace(self.base_part(x)),
                           base_trace.kernel, f"unitized({base_trace.name})")


class DirectSum(NestedAlgebra):
    """base_0 (+) base_1 with componentwise product; key (slot, k)."""

    kind = "sum"

    def __init__(self, first: GradedAlgebra, second: GradedAlgebra):
        super().__init__(first)
        self.parts = (first, second)

    def signature(self) -> Tuple[Any, ...]:
        return (self.kind, self.parts[0].signature(), self.parts[1].signature())

    def key_degree(self, key: Any) -> int:
        return key[1]

    def mul_terms(self, k1: Any, c1: GradedElement, k2: Any, c2: GradedElement):
        if k1[0] != k2[0]:
            return ()
        return (((k1[0], k1[1] + k2[1]), c1 * c2),)

    def pair(self, x0: GradedElement, x1: GradedElement) -> GradedElement:
        terms = {(0, k): c for k, c in x0.homogeneous()}
        terms.update({(1, k): c for k, c in x1.homogeneous()})
        return self.element(terms)

    def component(self, x: GradedElement, slot: int) -> GradedElement:
        out = self.parts[slot].zero()
        for (s, _), c in x.terms.items():
            if s == slot:
                out = out + c
        return out

    def one(self) -> GradedElement:
        return self.pair(self.parts[0].one(), self.parts[1].one())

    def sum_derivation(self, first: Derivation, second: Derivation) -> Derivation:
        return Derivation(self, lambda x: self.pair(first(self.component(x, 0)),
                                                    second(self.component(x, 1))), "sum")

    def sum_multiplier(self, first: Multiplier, second: Multiplier) -> Multiplier:
        def left(x):
            return self.pair(first.left(self.component(x, 0)), second.left(self.component(x, 1)))

        def right(x):
            return self.pair(first.right(self.component(x, 0)), second.right(self.component(x, 1)))

        element = None
        if first.element is not None and second.element is not None:
            element = self.pair(first.element, second.element)
        return Multiplier(left, right, element, "sum")


@dataclass
class TensorProduct:
    """Omega_1 (x)^ Omega_2 for form backends, realised on T^{d1+d2} with kron coefficients."""

    algebra: TorusForms
    first: TorusForms
    second: TorusForms

    def left(self, a: GradedElement) -> GradedElement:
        K = self.algebra.kernel
        pad = (0,) * self.second.d
        ident = K.identity(self.second.N)
        terms = {}
        for (f, I, q), M in a.terms.items():
            tag = tuple((l + pad, c) for l, c in q)
            terms[(f + pad, I, tag)] = K.kron(M, ident)
        return self.algebra.element(terms)

    def right(self, b: GradedElement) -> GradedElement:
        K = self.algebra.kernel
        d1 = self.first.d
        pad = (0,) * d1
        ident = K.identity(self.first.N)
        terms = {}
        for (f, I, q), M in b.terms.items():
            tag = tuple((pad + l, c) for l, c in q)
            terms[(pad + f, tuple(i + d1 for i in I), tag)] = K.kron(ident, M)
        return self.algebra.element(terms)

    def pure(self, a: GradedElement, b: GradedElement) -> GradedElement:
        """a (x) b; (1 (x) b)(a (x) 1) = (-1)^{|a||b|} a (x) b."""
        return self.left(a) * self.right(b)


@dataclass
class IntervalTensorProduct:
    """
    Tensor products with one interval factor, realised as Omega*([0, s]) (x) (base (x)^ other).
    With the interval on the right, a (x) (t^p dt^e (x) w) = (-1)^{e|a|} t^p dt^e (x) (a (x) w).
    """

    algebra: IntervalAlgebra
    inner: TensorProduct
    interval_first: bool

    def _spread(self, x: GradedElement, embed: Callable[[GradedElement], GradedElement]) -> GradedElement:
        out = self.algebra.zero()
        for (p, e, _), c in x.terms.items():
            out = out + self.algebra.embed(embed(c), p, bool(e))
        return out

    def left(self, a: GradedElement) -> GradedElement:
        if self.interval_first:
            return self._spread(a, self.inner.left)
        return self.algebra.embed(self.inner.left(a))

    def right(self, b: GradedElement) -> GradedElement:
        if self.interval_first:
            return self.algebra.embed(self.inner.right(b))
        return self._spread(b, self.inner.right)

    def pure(self, a: GradedElement, b: GradedElement) -> GradedElement:
        return self.left(a) * self.right(b)


def graded_tensor_product(first: GradedAlgebra,
                          second: GradedAlgebra) -> Union[TensorProduct, IntervalTensorProduct]:
    """Matrix-form, torus and interval factors; at most one interval factor."""
    if first.kernel is not second.kernel:
        raise BackendMismatchError("tensor factors use different scalar kernels")
    if isinstance(first, IntervalAlgebra) and isinstance(second, IntervalAlgebra):
        logger.error("tensor of two interval algebras requested")
        raise BackendMismatchError("cannot tensor two interval algebras")
    if isinstance(first, IntervalAlgebra) or isinstance(second, IntervalAlgebra):
        interval_first = isinstance(first, IntervalAlgebra)
        ext = first if interval_first else second
        inner = (graded_tensor_product(first.base, second) if interval_first
                 else graded_tensor_product(first, second.base))
        algebra = IntervalAlgebra(inner.algebra, ext.length, ext.orientation, ext.cap)
        return IntervalTensorProduct(algebra, inner, interval_first)
    if not isinstance(first, TorusForms) or not isinstance(second, TorusForms):
        logger.error("unsupported tensor pair: %s, %s", first.kind, second.kind)
        raise BackendMismatchError(f"cannot tensor {first.kind} with {second.kind}")
    cls = MatrixForms if isinstance(first, MatrixForms) and isinstance(second, MatrixForms) else TorusForms
    algebra = cls(first.d + second.d, first.N * second.N, first.kernel)
    return TensorProduct(algebra, first, second)
