"""
Graded algebras, derivations, curvature multipliers and graded traces.

Every element is a finite map from backend keys to coefficients. The key
determines the degree; the algebra descriptor knows how two keyed terms
multiply (with their Koszul or wedge sign). Backends defined here:

    TorusForms      trigonometric-polynomial End(C^N)-valued forms on T^d
    MatrixForms     constant-coefficient forms (frequency 0 only, d = 0)
    OperatorForms   degree-tagged matrices on a finite Hilbert space

Backends built on top of another algebra live in extensions.py.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import BackendMismatchError, ConventionError, ExactnessError
from .logger import logger
from .scalars import Kernel, get_kernel
from .utils import sign_of

Freq = Tuple[int, ...]
Index = Tuple[int, ...]
Tag = Tuple[Tuple[Freq, Any], ...]


@lru_cache(maxsize=65536)
def wedge_sign(left: Index, right: Index) -> Tuple[int, Index]:
    """Sign and merged index of dx_left ^ dx_right; (0, ()) on collision."""
    if set(left) & set(right):
        return 0, ()
    inversions = 0
    for i in left:
        for j in right:
            if j < i:
                inversions += 1
    return sign_of(inversions), tuple(sorted(left + right))


class GradedAlgebra:
    """Backend descriptor. Subclasses define key degrees and term products."""

    kind = "abstract"
    unital = True

    def __init__(self, kernel: Any = "exact"):
        self.kernel: Kernel = get_kernel(kernel)

    # subclass hooks

    def key_degree(self, key: Any) -> int:
        raise NotImplementedError

    def mul_terms(self, k1: Any, c1: Any, k2: Any, c2: Any) -> Iterable[Tuple[Any, Any]]:
        raise NotImplementedError

    def signature(self) -> Tuple[Any, ...]:
        return (self.kind, id(self))

    def one(self) -> "GradedElement":
        raise ConventionError(f"{self.kind} algebra is not unital")

    # coefficient arithmetic: matrices by default

    def cadd(self, a: Any, b: Any) -> Any:
        return a + b

    def cscale(self, c: Any, s: Any) -> Any:
        return self.kernel.scale(c, s)

    def cis_zero(self, c: Any) -> bool:
        return self.kernel.mat_is_zero(c)

    def cmul(self, a: Any, b: Any) -> Any:
        return a @ b

    def cneg(self, c: Any) -> Any:
        return -c

    # construction

    def element(self, terms: Dict[Any, Any]) -> "GradedElement":
        return GradedElement(self, {k: c for k, c in terms.items() if not self.cis_zero(c)})

    def zero(self) -> "GradedElement":
        return GradedElement(self, {})

    def __eq__(self, other: Any) -> bool:
        return isinstance(other, GradedAlgebra) and self.signature() == other.signature()

    def __hash__(self) -> int:
        return hash(self.signature())


class NestedAlgebra(GradedAlgebra):
    """Algebra whose coefficients are elements of another graded algebra."""

    def __init__(self, base: GradedAlgebra):
        super().__init__(base.kernel)
        self.base = base

    def cscale(self, c: "GradedElement", s: Any) -> "GradedElement":
        return c.scale(s)

    def cis_zero(self, c: "GradedElement") -> bool:
        return c.is_zero()

    def cmul(self, a: "GradedElement", b: "GradedElement") -> "GradedElement":
        return a * b


class ZeroAlgebra(GradedAlgebra):
    """The zero algebra: every element is 0 and 1 = 0."""

    kind = "zero"

    def key_degree(self, key: Any) -> int:
        return 0

    def mul_terms(self, k1: Any, c1: Any, k2: Any, c2: Any) -> Iterable[Tuple[Any, Any]]:
        return ()

    def signature(self) -> Tuple[Any, ...]:
        return (self.kind, self.kernel.name)

    def element(self, terms: Dict[Any, Any]) -> "GradedElement":
        return GradedElement(self, {})

    def one(self) -> "GradedElement":
        return self.zero()


class GradedElement:
    """Finite sum of keyed homogeneous terms in one backend."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: GradedAlgebra, terms: Dict[Any, Any]):
        self.algebra = algebra
        self.terms = terms

    def _check(self, other: "GradedElement") -> None:
        if not isinstance(other, GradedElement):
            raise BackendMismatchError(f"cannot combine element with {type(other).__name__}")
        if other.algebra is not self.algebra and other.algebra != self.algebra:
            raise BackendMismatchError(
                f"backend mismatch: {self.algebra.kind} vs {other.algebra.kind}")

    def __add__(self, other: "GradedElement") -> "GradedElement":
        self._check(other)
        A = self.algebra
        out = dict(self.terms)
        for k, c in other.terms.items():
            if k in out:
                s = A.cadd(out[k], c)
                if A.cis_zero(s):
                    del out[k]
                else:
                    out[k] = s
            else:
                out[k] = c
        return GradedElement(A, out)

    def __neg__(self) -> "GradedElement":
        A = self.algebra
        return GradedElement(A, {k: A.cneg(c) for k, c in self.terms.items()})

    def __sub__(self, other: "GradedElement") -> "GradedElement":
        return self + (-other)

    def scale(self, s: Any) -> "GradedElement":
        A = self.algebra
        if isinstance(s, int) and s == 1:
            return self
        s = A.kernel.scalar(s)
        if A.kernel.is_zero(s):
            return A.zero()
        return A.element({k: A.cscale(c, s) for k, c in self.terms.items()})

    def __mul__(self, other: Any) -> "GradedElement":
        if not isinstance(other, GradedElement):
            return self.scale(other)
        self._check(other)
        A = self.algebra
        out: Dict[Any, Any] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                for k, c in A.mul_terms(k1, c1, k2, c2):
                    if k in out:
                        out[k] = A.cadd(out[k], c)
                    else:
                        out[k] = c
        return A.element(out)

    def __rmul__(self, s: Any) -> "GradedElement":
        return self.scale(s)

    def degrees(self) -> List[int]:
        return sorted({self.algebra.key_degree(k) for k in self.terms})

    def part(self, degree: int) -> "GradedElement":
        deg = self.algebra.key_degree
        return GradedElement(self.algebra, {k: c for k, c in self.terms.items() if deg(k) == degree})

    def homogeneous(self) -> List[Tuple[int, "GradedElement"]]:
        return [(k, self.part(k)) for k in self.degrees()]

    def truncate(self, top: int) -> "GradedElement":
        deg = self.algebra.key_degree
        return GradedElement(self.algebra, {k: c for k, c in self.terms.items() if deg(k) <= top})

    def degree(self) -> int:
        degs = self.degrees()
        if not degs:
            return 0
        if len(degs) > 1:
            raise ConventionError(f"element is not homogeneous: degrees {degs}")
        return degs[0]

    def is_zero(self) -> bool:
        return not self.terms

    def residual(self) -> float:
        """Largest coefficient magnitude (0 for the zero element)."""
        A = self.algebra
        best = 0.0
        for c in self.terms.values():
            if isinstance(c, GradedElement):
                best = max(best, c.residual())
            else:
                best = max(best, A.kernel.mat_residual(c))
        return best

    def __repr__(self) -> str:
        return f"<{self.algebra.kind} element degrees={self.degrees()} terms={len(self.terms)}>"


def mul(x: GradedElement, y: GradedElement) -> GradedElement:
    if not isinstance(x, GradedElement) or not isinstance(y, GradedElement):
        raise BackendMismatchError("mul expects two graded elements")
    return x * y


def graded_commutator(a: GradedElement, x: GradedElement) -> GradedElement:
    """[a, x] = a x - (-1)^{|a||x|} x a, extended bilinearly over homogeneous parts."""
    out = a.algebra.zero()
    for da, pa in a.homogeneous():
        for dx, px in x.homogeneous():
            out = out + pa * px - (px * pa).scale(sign_of(da * dx))
    return out


class TorusForms(GradedAlgebra):
    """
    End(C^N)-valued forms on T^d with trigonometric-polynomial coefficients.

    Key (freq, I, tag): e^{2 pi i freq.x} e^{tag} dx_I, where tag is a
    canonical tuple of (frequency, coefficient) pairs standing for the
    exponential of the trigonometric polynomial sum c e^{2 pi i l.x}. Tags
    stay symbolic; integration refuses tagged top-degree terms.
    """

    kind = "torus"

    def __init__(self, d: int, N: int = 1, kernel: Any = "exact"):
        super().__init__(kernel)
        self.d = d
        self.N = N
        self._zero_freq: Freq = (0,) * d
        self._top: Index = tuple(range(d))

    def signature(self) -> Tuple[Any, ...]:
        return (self.kind, self.d, self.N, self.kernel.name)

    def key_degree(self, key: Any) -> int:
        return len(key[1])

    def mul_terms(self, k1: Any, c1: Any, k2: Any, c2: Any) -> Iterable[Tuple[Any, Any]]:
        f1, I1, q1 = k1
        f2, I2, q2 = k2
        s, I = wedge_sign(I1, I2)
        if s == 0:
            return ()
        M = c1 @ c2
        if s < 0:
            M = -M
        f = tuple(a + b for a, b in zip(f1, f2))
        return (((f, I, self.tag_add(q1, q2)), M),)

    # tags

    def tag_add(self, q1: Tag, q2: Tag) -> Tag:
        if not q1:
            return q2
        if not q2:
            return q1
        acc = dict(q1)
        for f, c in q2:
            acc[f] = acc[f] + c if f in acc else c
        return tuple(sorted((f, c) for f, c in acc.items() if not self.kernel.is_zero(c)))

    def make_tag(self, coeffs: Dict[Freq, Any], scale: Any = 1) -> Tag:
        K = self.kernel
        s = K.scalar(scale)
        items = []
        for f, c in coeffs.items():
            v = K.scalar(c) * s
            if not K.is_zero(v):
                items.append((tuple(f), v))
        return tuple(sorted(items))

    # constructors

    def _scalar_matrix(self, value: Any) -> np.ndarray:
        if isinstance(value, np.ndarray):
            if value.shape != (self.N, self.N):
                raise ConventionError(f"coefficient must be {self.N}x{self.N}, got {value.shape}")
            return value
        return self.kernel.scale(self.kernel.identity(self.N), self.kernel.scalar(value))

    def term(self, freq: Sequence[int], index: Sequence[int], coeff: Any = 1, tag: Tag = ()) -> GradedElement:
        freq = tuple(freq)
        if len(freq) != self.d:
            raise ConventionError(f"frequency must have length {self.d}")
        idx = tuple(index)
        if sorted(set(idx)) != sorted(idx) or any(i < 0 or i >= self.d for i in idx):
            raise ConventionError(f"bad multi-index {idx} for d={self.d}")
        s, idx_sorted = wedge_sign((), idx) if idx == tuple(sorted(idx)) else _sort_index(idx)
        M = self._scalar_matrix(coeff)
        if s < 0:
            M = -M
        return self.element({(freq, idx_sorted, tag): M})

    def function(self, coeffs: Dict[Sequence[int], Any]) -> GradedElement:
        out = self.zero()
        for f, c in coeffs.items():
            out = out + self.term(f, (), c)
        return out

    def constant(self, coeff: Any, index: Sequence[int] = ()) -> GradedElement:
        return self.term(self._zero_freq, index, coeff)

    def one(self) -> GradedElement:
        return self.constant(1)

    def dx(self, j: int) -> GradedElement:
        return self.constant(1, (j,))

    def exp_tag(self, coeffs: Dict[Freq, Any], scale: Any = 1) -> GradedElement:
        """The degree-0 element e^{scale * sum c e^{2 pi i l.x}}, kept symbolic."""
        return self.element({(self._zero_freq, (), self.make_tag(coeffs, scale)): self.kernel.identity(self.N)})

    # calculus

    def d_form(self, x: GradedElement) -> GradedElement:
        """de Rham differential; dx_j lands on the left."""
        K = self.kernel
        tau = K.tau()
        out: Dict[Any, Any] = {}
        tagged = self.zero()
        for (f, I, q), M in x.terms.items():
            for j in range(self.d):
                if f[j] == 0:
                    continue
                s, J = wedge_sign((j,), I)
                if s == 0:
                    continue
                key = (f, J, q)
                c = K.scale(M, tau * (f[j] * s))
                out[key] = out[key] + c if key in out else c
            if q:
                tagged = tagged + self.tag_differential(q) * self.element({(f, I, q): M})
        return self.element(out) + tagged

    def tag_differential(self, q: Tag) -> GradedElement:
        """d of the exponent polynomial: an untagged scalar 1-form."""
        K = self.kernel
        tau = K.tau()
        out = self.zero()
        for l, c in q:
            for j in range(self.d):
                if l[j]:
                    out = out + self.term(l, (j,), c * tau * l[j])
        return out

    def integrate(self, x: GradedElement) -> Any:
        """Normalized volume: the matrix trace of the (k=0, I=top) coefficient."""
        K = self.kernel
        total = K.zero()
        for (f, I, q), M in x.terms.items():
            if I != self._top:
                continue
            if q:
                logger.error("tagged top-degree term reached the trace: tag=%s", q)
                raise ExactnessError("non-cancelling exponent tags in a trace evaluation")
            if f == self._zero_freq:
                total = total + K.trace(M)
        return total

    # affine pushforward (x -> A x + b)

    def transform(self, x: GradedElement, A_inv: np.ndarray, b: Sequence[Fraction],
                  U: Optional[np.ndarray] = None, U_inv: Optional[np.ndarray] = None) -> GradedElement:
        """
        Pushforward along g(x) = A x + b, i.e. (g.w)(y) = w(g^{-1} y), with
        End(E) coefficients conjugated by the constant bundle map U.
        A_inv is the integer inverse of A.
        """
        K = self.kernel
        AinvT = np.asarray(A_inv, dtype=int).T
        out = self.zero()
        for (f, I, q), M in x.terms.items():
            f2, ph = self._move_freq(f, AinvT, b)
            coeff = K.scale(M, ph)
            if U is not None:
                coeff = U @ coeff @ U_inv
            q2 = self._move_tag(q, AinvT, b)
            head = self.element({(f2, (), q2): coeff})
            out = out + head * self._pull_index(I, tuple(tuple(int(v) for v in row) for row in np.asarray(A_inv, dtype=int)))
        return out

    def _move_freq(self, f: Freq, AinvT: np.ndarray, b: Sequence[Fraction]) -> Tuple[Freq, Any]:
        f2 = tuple(int(v) for v in AinvT @ np.asarray(f, dtype=int))
        r = sum((Fraction(fi) * Fraction(bi) for fi, bi in zip(f2, b)), Fraction(0))
        return f2, self.kernel.phase(r)

    def _move_tag(self, q: Tag, AinvT: np.ndarray, b: Sequence[Fraction]) -> Tag:
        if not q:
            return q
        moved = {}
        for l, c in q:
            l2, ph = self._move_freq(l, AinvT, b)
            moved[l2] = c * ph
        return self.make_tag(moved)

    def _pull_index(self, I: Index, A_inv: Tuple[Tuple[int, ...], ...]) -> GradedElement:
        """(g^{-1})^* dx_I as a constant form: dx_i -> sum_j (A^{-1})_{ij} dx_j."""
        return _pull_index_cached(self, I, A_inv)

    # sampling

    def random_element(self, rng: np.random.Generator, degree: int, max_freq: int = 1,
                       terms: int = 2, entry_range: int = 2) -> GradedElement:
        out = self.zero()
        if degree > self.d:
            return out
        for _ in range(terms):
            idx = tuple(sorted(rng.choice(self.d, size=degree, replace=False).tolist())) if degree else ()
            f = tuple(int(v) for v in rng.integers(-max_freq, max_freq + 1, size=self.d)) if self.d else ()
            out = out + self.term(f, idx, random_matrix(self.kernel, rng, self.N, entry_range))
        return out

    def basis_elements(self, degree: int, max_freq: int = 1) -> List[GradedElement]:
        K = self.kernel
        out = []
        freqs = list(product(range(-max_freq, max_freq + 1), repeat=self.d))
        for idx in combinations(range(self.d), degree):
            for f in freqs:
                for a in range(self.N):
                    for b in range(self.N):
                        M = K.zeros(self.N)
                        M[a, b] = 1
                        out.append(self.term(f, idx, M))
        return out


def _sort_index(idx: Index) -> Tuple[int, Index]:
    s = 1
    cur: Index = ()
    for i in idx:
        t, cur = wedge_sign(cur, (i,))
        s *= t
    return s, cur


_PULL_CACHE: Dict[Any, GradedElement] = {}


def _pull_index_cached(forms: "TorusForms", I: Index, A_inv: Tuple[Tuple[int, ...], ...]) -> GradedElement:
    key = (forms.signature(), I, A_inv)
    hit = _PULL_CACHE.get(key)
    if hit is not None:
        return hit
    out = forms.one()
    for i in I:
        row = forms.zero()
        for j, a in enumerate(A_inv[i]):
            if a:
                row = row + forms.dx(j).scale(a)
        out = out * row
    _PULL_CACHE[key] = out
    return out


class MatrixForms(TorusForms):
    """Constant-coefficient M_N-valued forms in d exterior generators."""

    kind = "matrix-form"

    def term(self, freq: Sequence[int], index: Sequence[int], coeff: Any = 1, tag: Tag = ()) -> GradedElement:
        if any(freq) or tag:
            raise ConventionError("matrix-form backend only holds constant coefficients")
        return super().term(freq, index, coeff, tag)

    def form(self, index: Sequence[int], coeff: Any = 1) -> GradedElement:
        return self.constant(coeff, index)

    def random_element(self, rng: np.random.Generator, degree: int, max_freq: int = 0,
                       terms: int = 2, entry_range: int = 2) -> GradedElement:
        return super().random_element(rng, degree, 0, terms, entry_range)

    def basis_elements(self, degree: int, max_freq: int = 0) -> List[GradedElement]:
        return super().basis_elements(degree, 0)


class OperatorForms(GradedAlgebra):
    """Degree-tagged operators on C^dim: the algebra generated by a, [F,a], F^2-1."""

    kind = "operator"

    def __init__(self, dim: int, kernel: Any = "float"):
        super().__init__(kernel)
        self.dim = dim

    def signature(self) -> Tuple[Any, ...]:
        return (self.kind, self.dim, self.kernel.name, id(self))

    def key_degree(self, key: int) -> int:
        return key

    def mul_terms(self, k1: int, c1: Any, k2: int, c2: Any) -> Iterable[Tuple[Any, Any]]:
        return ((k1 + k2, c1 @ c2),)

    def cis_zero(self, c: Any) -> bool:
        if self.kernel.exact:
            return self.kernel.mat_is_zero(c)
        return not np.any(c)

    def op(self, M: Any, degree: int = 0) -> GradedElement:
        M = np.asarray(M, dtype=self.kernel.dtype)
        if M.shape != (self.dim, self.dim):
            raise ConventionError(f"operator must be {self.dim}x{self.dim}, got {M.shape}")
        return self.element({degree: M})

    def one(self) -> GradedElement:
        return self.op(self.kernel.identity(self.dim), 0)

    def matrix(self, x: GradedElement, degree: int) -> np.ndarray:
        return x.terms.get(degree, self.kernel.zeros(self.dim))


def random_matrix(kernel: Kernel, rng: np.random.Generator, n: int, entry_range: int = 2) -> np.ndarray:
    if kernel.exact:
        out = kernel.zeros(n)
        for idx in np.ndindex(out.shape):
            re = int(rng.integers(-entry_range, entry_range + 1))
            im = int(rng.integers(-entry_range, entry_range + 1))
            out[idx] = kernel.scalar((re, im))
        return out
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


class Derivation:
    """Degree +1 graded derivation on one algebra, given by its action."""

    def __init__(self, algebra: GradedAlgebra, action: Callable[[GradedElement], GradedElement],
                 name: str = "derivation", connection: Optional[GradedElement] = None):
        self.algebra = algebra
        self.action = action
        self.name = name
        # set when the derivation is d + ad(connection) on a form backend
        self.connection = connection

    def __call__(self, x: GradedElement) -> GradedElement:
        if x.algebra is not self.algebra and x.algebra != self.algebra:
            raise BackendMismatchError(f"{self.name} acts on {self.algebra.kind}, got {x.algebra.kind}")
        return self.action(x)

    def plus_inner(self, eta: GradedElement, t: Any = 1) -> "Derivation":
        """self + t ad(eta) for an odd element eta."""
        if eta.degrees() not in ([], [1]):
            raise ConventionError(f"inner perturbation must have degree 1, got {eta.degrees()}")
        eta_t = eta.scale(t)
        base = self.action
        connection = None if self.connection is None else self.connection + eta_t
        return Derivation(self.algebra, lambda x: base(x) + graded_commutator(eta_t, x),
                          f"{self.name}+ad", connection)


def apply_derivation(D: Derivation, x: GradedElement) -> GradedElement:
    return D(x)


def de_rham(forms: TorusForms) -> Derivation:
    return Derivation(forms, forms.d_form, "d", forms.zero())


def connection_derivation(forms: TorusForms, A: GradedElement) -> Derivation:
    """d + ad(A) for an End(E)-valued connection 1-form A."""
    return de_rham(forms).plus_inner(A)


def inner_derivation(F: GradedElement) -> Derivation:
    """Graded commutator with an odd element, e.g. [F, .] on operator forms."""
    return Derivation(F.algebra, lambda x: graded_commutator(F, x), "ad")


class Multiplier:
    """
    Curvature given through its left and right actions (degree +2).

    `element` is set when the curvature is an element of the algebra; the
    actions are then ordinary products.
    """

    def __init__(self, left: Callable[[GradedElement], GradedElement],
                 right: Callable[[GradedElement], GradedElement],
                 element: Optional[GradedElement] = None, name: str = "theta"):
        self._left = left
        self._right = right
        self.element = element
        self.name = name

    @classmethod
    def from_element(cls, theta: GradedElement, name: str = "theta") -> "Multiplier":
        if theta.degrees() not in ([], [2]):
            raise ConventionError(f"curvature must have degree 2, got {theta.degrees()}")
        return cls(lambda x: theta * x, lambda x: x * theta, theta, name)

    @classmethod
    def zero(cls) -> "Multiplier":
        return cls(lambda x: x.algebra.zero(), lambda x: x.algebra.zero(), None, "0")

    def left(self, x: GradedElement) -> GradedElement:
        return self._left(x)

    def right(self, x: GradedElement) -> GradedElement:
        return self._right(x)

    def is_zero(self) -> bool:
        return self.name == "0" or (self.element is not None and self.element.is_zero())


class GradedTrace:
    """Linear functional supported in degree n ("0 if deg xi != n")."""

    def __init__(self, degree: int, functional: Callable[[GradedElement], Any], kernel: Any,
                 name: str = "trace"):
        self.degree = degree
        self.functional = functional
        self.kernel = get_kernel(kernel)
        self.name = name

    def __call__(self, x: GradedElement) -> Any:
        top = x.part(self.degree)
        if top.is_zero():
            return self.kernel.zero()
        return self.functional(top)

    def negated(self) -> "GradedTrace":
        f = self.functional
        return GradedTrace(self.degree, lambda x: -f(x), self.kernel, f"-{self.name}")


def trace_eval(T: GradedTrace, x: GradedElement) -> Any:
    return T(x)


def torus_trace(forms: TorusForms) -> GradedTrace:
    return GradedTrace(forms.d, forms.integrate, forms.kernel, "integral")


@dataclass
class TraceCheck:
    trace_violation: float = 0.0
    closedness_violation: float = 0.0
    pairs: int = 0
    closed_samples: int = 0
    tol: float = 0.0
    details: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.trace_violation <= self.tol and self.closedness_violation <= self.tol


def check_graded_trace(T: GradedTrace, samples: Sequence[GradedElement],
                       nabla: Optional[Derivation] = None, tol: float = 0.0,
                       max_pairs: Optional[int] = None) -> TraceCheck:
    """
    Graded trace property over all sample pairs whose degrees add to n, and
    closedness on the degree n-1 samples when a derivation is given.
    """
    K = T.kernel
    report = TraceCheck(tol=tol)
    homog = [(x.degree(), x) for x in samples if not x.is_zero()]
    for dx, x in homog:
        for dy, y in homog:
            if dx + dy != T.degree:
                continue
            if max_pairs is not None and report.pairs >= max_pairs:
                break
            r = K.magnitude(T(x * y) - T(y * x) * sign_of(dx * dy))
            report.pairs += 1
            if r > report.trace_violation:
                report.trace_violation = r
    if nabla is not None:
        for dx, x in homog:
            if dx != T.degree - 1:
                continue
            r = K.magnitude(T(nabla(x)))
            report.closed_samples += 1
            report.closedness_violation = max(report.closedness_violation, r)
    logger.debug("trace check %s: pairs=%d closed=%d trace=%.3g closed=%.3g", T.name, report.pairs,
                 report.closed_samples, report.trace_violation, report.closedness_violation)
    return report


def check_multiplier(theta: Multiplier, nabla: Derivation, T: GradedTrace,
                     samples: Sequence[GradedElement]) -> float:
    """Largest violation of the multiplier axioms on the samples."""
    K = T.kernel
    worst = 0.0
    for x in samples:
        worst = max(worst, (nabla(theta.left(x)) - theta.left(nabla(x))).residual())
        worst = max(worst, (nabla(theta.right(x)) - theta.right(nabla(x))).residual())
        for k, part in x.homogeneous():
            if k == T.degree - 2:
                worst = max(worst, K.magnitude(T(theta.left(part)) - T(theta.right(part))))
    return worst
