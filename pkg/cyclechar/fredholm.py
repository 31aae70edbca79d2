"""
Finitely summable Fredholm modules as generalized cycles.

Omega is the algebra of operators generated by a, [F, a] and F^2 - 1 with the
derivation [F, .] (graded) and curvature theta = F^2 - 1. Even modules carry
a grading gamma and the trace m! Tr(gamma .) in degree 2m; odd modules use
sqrt(2i) Gamma(m + 3/2) Tr in degree 2m + 1.
"""

from dataclasses import asdict, dataclass, field
from fractions import Fraction
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
import sympy

from .cyclic import (BBCochain, Cochain, FiniteAlgebra, KClass, ResidualReport, bb, chern_idempotent, to_float,
                     chern_unitary, compare, cyclic_group_algebra, matrix_algebra, pair, represented, tensor, unitize)
from .cycles import GeneralizedChain, character, cycle, interval_chain, transgress
from .errors import AmbiguityError, ConventionError, ExactnessError
from .graded import GradedTrace, Multiplier, OperatorForms, inner_derivation
from .logger import logger, timed
from .scalars import FLOAT, Kernel, get_kernel

SQRT_2I = 1 + 1j


def _residual(K: Kernel, M: np.ndarray) -> float:
    return K.mat_residual(M)


@dataclass
class FredholmModule:
    """
    (H, F, gamma) over a represented algebra; gamma is None for odd modules.

    F need not satisfy F^2 = 1 (a pre-Fredholm module); only F = F* and,
    in the even case, gamma F gamma = -F with [gamma, a] = 0 are required.
    """

    algebra: FiniteAlgebra
    F: np.ndarray
    gamma: Optional[np.ndarray] = None
    name: str = "module"

    @property
    def kernel(self) -> Kernel:
        return self.algebra.kernel

    @property
    def even(self) -> bool:
        return self.gamma is not None

    @property
    def dim(self) -> int:
        return self.F.shape[0]

    def validate(self, tol: float = 1e-9) -> "FredholmModule":
        K = self.kernel
        tol = 0.0 if K.exact else tol
        if _residual(K, self.F - K.adjoint(self.F)) > tol:
            raise ConventionError(f"{self.name}: F is not selfadjoint")
        if self.algebra.representation is None:
            raise ConventionError(f"{self.name}: algebra has no representation")
        if self.algebra.representation[0].shape[0] != self.dim:
            raise ConventionError(f"{self.name}: representation does not act on H (dim {self.dim})")
        if self.gamma is not None:
            g = self.gamma
            if _residual(K, g @ g - K.identity(self.dim)) > tol:
                raise ConventionError(f"{self.name}: gamma^2 != 1")
            if _residual(K, g @ self.F @ g + self.F) > tol:
                raise ConventionError(f"{self.name}: F is not odd for gamma")
            for R in self.algebra.representation:
                if _residual(K, g @ R - R @ g) > tol:
                    raise ConventionError(f"{self.name}: the algebra does not commute with gamma")
        return self

    def F_squared_defect(self) -> np.ndarray:
        """1 - F^2."""
        return self.kernel.identity(self.dim) - self.F @ self.F


def even_module(algebra: FiniteAlgebra, F: Any, gamma: Any, name: str = "even", tol: float = 1e-9) -> FredholmModule:
    K = algebra.kernel
    return FredholmModule(algebra, K.matrix(F), K.matrix(gamma), name).validate(tol)


def odd_module(algebra: FiniteAlgebra, F: Any, name: str = "odd", tol: float = 1e-9) -> FredholmModule:
    K = algebra.kernel
    return FredholmModule(algebra, K.matrix(F), None, name).validate(tol)


def module_degree(M: FredholmModule, m: int) -> int:
    if m < 0:
        raise ConventionError(f"m must be non-negative, got {m}")
    return 2 * m if M.even else 2 * m + 1


def module_trace(M: FredholmModule, m: int) -> Tuple[Any, Optional[np.ndarray]]:
    """The constant c and grading g of int xi = c Tr(g xi)."""
    K = M.kernel
    if M.even:
        return K.scalar(math.factorial(m)), M.gamma
    if K.exact:
        raise ExactnessError("the odd trace constant sqrt(2i) Gamma(m + 3/2) is irrational; use the float kernel")
    return SQRT_2I * math.gamma(m + 1.5), None


def _traced(K: Kernel, g: Optional[np.ndarray], X: np.ndarray) -> Any:
    return K.trace(X if g is None else g @ X)


def omega_cycle(M: FredholmModule, m: int) -> GeneralizedChain:
    """The cycle (Omega_F, [F, .], a -> a, F^2 - 1, int) of degree 2m or 2m + 1."""
    K = M.kernel
    n = module_degree(M, m)
    omega = OperatorForms(M.dim, K)
    F = omega.op(M.F, 1)
    theta = omega.op(M.F @ M.F - K.identity(M.dim), 2)
    c, g = module_trace(M, m)
    trace = GradedTrace(n, lambda x: _traced(K, g, omega.matrix(x, n)) * c, K, f"Tr[{M.name}]")
    A = M.algebra

    def rho(a: np.ndarray):
        return omega.op(A.represent(a), 0)

    samples = [rho(b) for b in A.basis()[:4]] + [F, theta]
    return cycle(omega, A, rho, inner_derivation(F), Multiplier.from_element(theta, "F^2-1"), trace,
                 samples, True, f"Omega[{M.name}]")


def omega_character(M: FredholmModule, m: int) -> BBCochain:
    """Ch of the Omega cycle through the generic character machinery."""
    return character(omega_cycle(M, m))


def _reps(M: FredholmModule, args: Sequence[np.ndarray]) -> Tuple[np.ndarray, List[np.ndarray]]:
    A = M.algebra
    a0 = A.represent(args[0])
    coms = []
    for a in args[1:]:
        R = A.represent(a)
        coms.append(M.F @ R - R @ M.F)
    return a0, coms


def _words(a0: np.ndarray, factors: Sequence[np.ndarray], P: np.ndarray, j: int) -> np.ndarray:
    """sum over i0+..+ik = j of a0 P^i0 C1 P^i1 .. Ck P^ik."""
    row = [a0]
    for _ in range(j):
        row.append(row[-1] @ P)
    for C in factors:
        new: List[np.ndarray] = []
        for c in range(j + 1):
            acc = row[c] @ C
            if c:
                acc = acc + new[c - 1] @ P
            new.append(acc)
        row = new
    return row[j]


def _direct_character(M: FredholmModule, m: int) -> BBCochain:
    K = M.kernel
    n = module_degree(M, m)
    c, g = module_trace(M, m)
    P = M.F_squared_defect()
    comps = {}
    for k in range(n % 2, n + 1, 2):
        j = (n - k) // 2
        coef = c * K.scalar(Fraction(1, math.factorial(j + k)))

        def fn(args: Tuple[Any, ...], j=j, coef=coef) -> Any:
            a0, coms = _reps(M, args)
            return _traced(K, g, _words(a0, coms, P, j)) * coef

        comps[k] = Cochain(M.algebra, k, fn, None, f"ch^{k}({M.name})")
    return BBCochain(M.algebra, n, comps, f"ch({M.name})")


def ch_even(M: FredholmModule, m: int) -> BBCochain:
    """
    Ch^k(a0..ak) = m!/(m + k/2)! Tr gamma sum_{|i| = m - k/2} a0 (1-F^2)^i0 [F,a1] .. [F,ak] (1-F^2)^ik.
    """
    if not M.even:
        raise ConventionError(f"{M.name} is odd; use ch_odd")
    return _direct_character(M, m)


def ch_odd(M: FredholmModule, m: int) -> BBCochain:
    """Odd components k = 1, 3, .., 2m+1 with constant sqrt(2i) Gamma(m + 3/2)/(m + (k+1)/2)!."""
    if M.even:
        raise ConventionError(f"{M.name} is even; use ch_even")
    return _direct_character(M, m)


@dataclass
class OperatorHomotopy:
    """F_t = sum_p t^p coeffs[p] on [0, 1]; every coefficient selfadjoint (and odd for gamma)."""

    coeffs: List[np.ndarray]
    gamma: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.coeffs:
            raise ConventionError("a homotopy needs at least one coefficient")
        self.coeffs = [np.asarray(C, dtype=complex) for C in self.coeffs]
        for p, C in enumerate(self.coeffs):
            if np.max(np.abs(C - C.conj().T), initial=0.0) > 1e-9:
                raise ConventionError(f"homotopy coefficient t^{p} is not selfadjoint")
            if self.gamma is not None:
                g = np.asarray(self.gamma, dtype=complex)
                if np.max(np.abs(g @ C @ g + C), initial=0.0) > 1e-9:
                    raise ConventionError(f"homotopy coefficient t^{p} is not odd")

    @classmethod
    def linear(cls, F0: np.ndarray, F1: np.ndarray, gamma: Optional[np.ndarray] = None) -> "OperatorHomotopy":
        F0 = np.asarray(F0, dtype=complex)
        return cls([F0, np.asarray(F1, dtype=complex) - F0], gamma)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def at(self, t: float) -> np.ndarray:
        out = np.zeros_like(self.coeffs[0])
        for C in reversed(self.coeffs):
            out = out * t + C
        return out

    def derivative(self, t: float) -> np.ndarray:
        out = np.zeros_like(self.coeffs[0])
        for p in range(self.order, 0, -1):
            out = out * t + p * self.coeffs[p]
        return out

    def module(self, M: FredholmModule, t: float) -> FredholmModule:
        return FredholmModule(to_float(M.algebra), self.at(t), _float(M.gamma), f"{M.name}@{t:g}")


def _float(M: Optional[np.ndarray]) -> Optional[np.ndarray]:
    if M is None:
        return None
    return get_kernel("float").to_numpy(M) if M.dtype == object else np.asarray(M, dtype=complex)


def float_module(M: FredholmModule) -> FredholmModule:
    if not M.kernel.exact:
        return M
    return FredholmModule(to_float(M.algebra), _float(M.F), _float(M.gamma), M.name)


def _transgression_words(a0: np.ndarray, factors: Sequence[np.ndarray], P: np.ndarray,
                         D: np.ndarray, j: int) -> np.ndarray:
    """
    sum over l and |i| = j of (-1)^l a0 P^i0 C1 .. Cl (P^a D P^b) .. Ck P^ik with
    the derivative D inserted once inside slot l (a + b = i_l).
    """
    zero = np.zeros_like(a0)
    r0 = [a0] + [zero] * j
    r1 = [zero] * (j + 1)
    for l in range(len(factors) + 1):
        if l:
            C = factors[l - 1]
            r0 = [x @ C for x in r0]
            r1 = [x @ C for x in r1]
        sign = -1 if l % 2 else 1
        for c in range(j + 1):
            if c:
                r0[c] = r0[c] + r0[c - 1] @ P
                r1[c] = r1[c] + r1[c - 1] @ P
            r1[c] = r1[c] + sign * (r0[c] @ D)
    return r1[j]


def transgression(M: FredholmModule, h: OperatorHomotopy, m: int, nodes: Optional[int] = None) -> BBCochain:
    """
    Tch with (b+B) Tch = Ch(F_1) - Ch(F_0), by Gauss-Legendre quadrature in t:

        Tch^k = -c/(m + (k+1)/2)! sum_l (-1)^l sum_{|i| = j-1}
                int_0^1 Tr g a0 P^i0 [F_t,a1] .. [F_t,al] P^a F'_t P^b .. [F_t,ak] P^ik dt

    with P = 1 - F_t^2 and j = (n + 1 - k)/2 for the degree n of the module.
    The polynomial degree of the integrand fixes the node count when `nodes` is None.
    """
    n = module_degree(M, m)
    M = float_module(M)
    c, g = module_trace(M, m)
    A = M.algebra
    q = max(h.order, 1)
    comps = {}
    for k in range((n + 1) % 2, n, 2):
        j = (n + 1 - k) // 2
        poly = 2 * q * (j - 1) + q * k + q - 1
        count = nodes or max(1, (poly + 2) // 2)
        x, w = leggauss(count)
        ts = (x + 1) / 2
        ws = w / 2
        coef = -c / math.factorial(j + k)

        def fn(args: Tuple[Any, ...], j=j, coef=coef, ts=ts, ws=ws) -> complex:
            a0 = A.represent(args[0])
            reps = [A.represent(a) for a in args[1:]]
            terms = []
            for t, wt in zip(ts, ws):
                Ft = h.at(t)
                P = np.eye(Ft.shape[0]) - Ft @ Ft
                coms = [Ft @ R - R @ Ft for R in reps]
                X = _transgression_words(a0, coms, P, h.derivative(t), j - 1)
                terms.append(wt * np.trace(X if g is None else g @ X))
            return FLOAT.total(terms) * coef

        comps[k] = Cochain(A, k, fn, None, f"Tch^{k}({M.name})")
    return BBCochain(A, n - 1, comps, f"Tch({M.name})")


def transgression_even(M: FredholmModule, h: OperatorHomotopy, m: int) -> BBCochain:
    if not M.even:
        raise ConventionError(f"{M.name} is odd; use transgression_odd")
    return transgression(M, h, m)


def transgression_odd(M: FredholmModule, h: OperatorHomotopy, m: int) -> BBCochain:
    if M.even:
        raise ConventionError(f"{M.name} is even; use transgression_even")
    return transgression(M, h, m)


def homotopy_chain(M: FredholmModule, h: OperatorHomotopy, m: int) -> GeneralizedChain:
    """The interval chain over Omega_{F_0} with zeta = sum_{p >= 1} t^p (x) coeffs[p]."""
    n = module_degree(M, m)
    M0 = FredholmModule(to_float(M.algebra), h.at(0.0), _float(M.gamma), f"{M.name}_0")
    C = omega_cycle(M0, m)
    zeta = [(p, False, C.omega.op(G, 1)) for p, G in enumerate(h.coeffs) if p]
    return interval_chain(C, zeta, 1, "positive", f"{M.name}^c", cap=max(8, h.order * (n + 1) + 1))


def verify_transgression(M: FredholmModule, h: OperatorHomotopy, m: int, tol: float = 1e-8,
                         **kwargs: Any) -> ResidualReport:
    """(b+B) Tch = Ch(F_1) - Ch(F_0)."""
    Mf = float_module(M)
    T = transgression(Mf, h, m)
    end = _direct_character(h.module(Mf, 1.0), m)
    start = _direct_character(h.module(Mf, 0.0), m)
    diff = end - start
    with timed("transgression coboundary on %s", M.name):
        return compare(bb(T), diff, tol, label=f"transgression {M.name}", **kwargs)


def cross_check_transgression(M: FredholmModule, h: OperatorHomotopy, m: int, tol: float = 1e-8,
                              **kwargs: Any) -> ResidualReport:
    """The quadrature transgression against the character of the interval chain."""
    Mf = float_module(M)
    generic = transgress(homotopy_chain(Mf, h, m), tol)
    return compare(transgression(Mf, h, m), generic, tol,
                   label=f"transgression cross-check {M.name}", **kwargs)


@dataclass
class IndexResult:
    index: int
    kernel_dim: int
    cokernel_dim: int
    plus_dim: int
    minus_dim: int
    smallest_singular: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _sympy_matrix(K: Kernel, X: np.ndarray) -> sympy.Matrix:
    def conv(x: Any) -> Any:
        if hasattr(x, "as_expr"):
            return x.as_expr()
        return sympy.nsimplify(x)
    return sympy.Matrix(X.shape[0], X.shape[1], lambda i, j: conv(X[i, j]))


def _rank(K: Kernel, X: np.ndarray, tol: float) -> Tuple[int, Optional[float]]:
    if K.exact:
        return int(_sympy_matrix(K, X).rank()), None
    sv = np.linalg.svd(np.asarray(X, dtype=complex), compute_uv=False)
    close = [s for s in sv if tol / 10 <= s <= tol * 10]
    if close:
        raise AmbiguityError(f"singular value {close[0]:.3g} within a factor 10 of tol={tol:g}",
                             {"singular_values": [float(s) for s in sv], "tol": tol})
    rank = int(np.sum(sv > tol))
    positive = [float(s) for s in sv if s > tol]
    return rank, (min(positive) if positive else None)


def _amplified(M: FredholmModule, N: int) -> Tuple[np.ndarray, np.ndarray]:
    K = M.kernel
    I = K.identity(N)
    return K.kron(I, M.F), K.kron(I, M.gamma)


def fredholm_index(M: FredholmModule, e: KClass, tol: float = 1e-9) -> IndexResult:
    """
    Index of e (F (x) 1) e from ran(e) on H+ (x) C^N to ran(e) on H- (x) C^N.

    Dimensions are ranks of e P+-, e F e P+ (singular values above tol, or
    exact ranks over Q(i)); a singular value within a factor 10 of tol is
    reported as an AmbiguityError.
    """
    if not M.even:
        raise ConventionError("the index pairing needs an even module")
    if e.kind != "idempotent":
        raise ConventionError("the index pairing needs an idempotent")
    K = M.kernel
    E = e.represent()
    F, g = _amplified(M, e.N)
    one = K.identity(E.shape[0])
    half = K.scalar(Fraction(1, 2))
    plus = K.scale(one + g, half)
    minus = K.scale(one - g, half)
    plus_dim, _ = _rank(K, E @ plus, tol)
    minus_dim, _ = _rank(K, E @ minus, tol)
    rank, smallest = _rank(K, E @ F @ E @ plus, tol)
    result = IndexResult(plus_dim - minus_dim, plus_dim - rank, minus_dim - rank, plus_dim, minus_dim, smallest)
    logger.debug("index of %s on e (N=%d): %s", M.name, e.N, result)
    return result


def index_pairing(M: FredholmModule, e: KClass, m: int) -> Any:
    """<Ch_2m(F), ch(e)>."""
    if e.algebra is not M.algebra:
        raise ConventionError("the idempotent must live over the module's algebra")
    return pair(ch_even(M, m), chern_idempotent(e, top=2 * m))


def sf_pairing(M: FredholmModule, u: KClass, m: int) -> complex:
    """<Ch_{2m+1}(F), ch(u)>; floating kernel only."""
    if u.algebra is not M.algebra:
        raise ConventionError("the unitary must live over the module's algebra")
    return complex(pair(ch_odd(M, m), chern_unitary(u, top=2 * m + 1)))


@dataclass
class SpectralFlowResult:
    value: int
    crossings: List[Tuple[float, float, int]] = field(default_factory=list)
    evaluations: int = 0
    nudges: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _spectrum(X: np.ndarray, tol: float) -> Tuple[Optional[int], float]:
    """(#negative eigenvalues or None when one is within tol of zero, min |eigenvalue|)."""
    ev = np.linalg.eigvalsh(X)
    gap = float(np.min(np.abs(ev)))
    return (None if gap < tol else int(np.sum(ev < 0))), gap


def spectral_flow(path: OperatorHomotopy, tol: float = 1e-9, cells: int = 16, resolution: float = 1e-6,
                  max_nudges: int = 8, max_evaluations: int = 100000) -> SpectralFlowResult:
    """
    Net count of eigenvalues crossing zero along a selfadjoint path, negative to
    positive counting +1.

    Every cell [a, b] is bisected until it is certified: eigenvalues move at most
    L |b - a| with L = sum_p p |C_p|, so gap(a) + gap(b) > L (b - a) rules out a zero
    inside. A cell narrower than `resolution` that is still uncertified is recorded
    as a crossing cell with #neg(a) - #neg(b). A midpoint with an eigenvalue within
    tol of zero is moved inside its cell. `AmbiguityError` when that keeps failing or
    the refinement exceeds `max_evaluations`.
    """
    lipschitz = sum(p * float(np.linalg.norm(C, 2)) for p, C in enumerate(path.coeffs))
    evaluations = 0
    nudges = 0

    def probe(t: float) -> Tuple[Optional[int], float]:
        nonlocal evaluations
        evaluations += 1
        if evaluations > max_evaluations:
            logger.error("spectral flow refinement exceeded %d evaluations", max_evaluations)
            raise AmbiguityError(f"spectral flow not resolved within {max_evaluations} evaluations",
                                 {"t": t, "lipschitz": lipschitz, "resolution": resolution})
        return _spectrum(path.at(t), tol)

    def settle(a: float, b: float) -> Tuple[float, int, float]:
        """A point near the middle of (a, b) with no eigenvalue within tol of zero."""
        nonlocal nudges
        mid = (a + b) / 2
        for step in range(max_nudges + 1):
            offset = (b - a) * step / (4 * (max_nudges + 1))
            t = mid + (offset if step % 2 else -offset)
            neg, gap = probe(t)
            if neg is not None:
                return t, neg, gap
            nudges += 1
        ev = np.linalg.eigvalsh(path.at(mid))
        logger.error("spectral flow refinement stalled near t=%.6g", mid)
        raise AmbiguityError(f"eigenvalue stays within {tol:g} of zero near t={mid:.6g}",
                             {"t": mid, "cell": [a, b], "eigenvalues": [float(x) for x in ev]})

    start, end = probe(0.0), probe(1.0)
    if start[0] is None or end[0] is None:
        raise ConventionError("the path has a zero eigenvalue at an endpoint")
    points = [(0.0,) + start]
    for i in range(1, cells):
        lo, hi = (i - 0.5) / cells, (i + 0.5) / cells
        points.append(settle(lo, hi))
    points.append((1.0,) + end)

    crossings: List[Tuple[float, float, int]] = []
    stack = [(points[i], points[i + 1]) for i in reversed(range(len(points) - 1))]
    while stack:
        (a, na, ga), (b, nb, gb) = stack.pop()
        if ga + gb > lipschitz * (b - a):
            continue
        if b - a < resolution:
            if na != nb:
                crossings.append((a, b, na - nb))
            continue
        mid = settle(a, b)
        stack.append((mid, (b, nb, gb)))
        stack.append(((a, na, ga), mid))
    result = SpectralFlowResult(sum(c for _, _, c in crossings), crossings, evaluations, nudges)
    logger.debug("spectral flow: %d from %d crossing cells (%d evaluations, %d nudges)",
                 result.value, len(crossings), evaluations, nudges)
    return result


def conjugated(M: FredholmModule, u: KClass) -> Tuple[np.ndarray, np.ndarray]:
    """(F (x) 1, u* (F (x) 1) u) on C^N (x) H."""
    Mf = float_module(M)
    U = _float(u.represent())
    F = np.kron(np.eye(u.N), Mf.F)
    return F, U.conj().T @ F @ U


def unitary_spectral_flow(M: FredholmModule, u: KClass, tol: float = 1e-9) -> SpectralFlowResult:
    """Spectral flow along the linear path from F (x) 1 to u* (F (x) 1) u."""
    F, Fu = conjugated(M, u)
    return spectral_flow(OperatorHomotopy.linear(F, Fu), tol)


# doubling, amplification


def _doubled_algebra(A: FiniteAlgebra) -> FiniteAlgebra:
    """A+ acting on H (+) H by a -> diag(a, 0), the adjoined unit by the identity."""
    Af = to_float(A)
    plus = unitize(Af)
    d = Af.representation[0].shape[0]
    zero = np.zeros((d, d), dtype=complex)
    reps = [np.eye(2 * d, dtype=complex)] + [np.block([[R, zero], [zero, zero]]) for R in Af.representation]
    return represented(plus, reps, f"{A.name}+")


def _doubled_gamma(M: FredholmModule) -> Optional[np.ndarray]:
    if M.gamma is None:
        return None
    g = _float(M.gamma)
    return np.block([[g, np.zeros_like(g)], [np.zeros_like(g), -g]])


def _scaled(M: FredholmModule, rescale: bool) -> Tuple[np.ndarray, float]:
    F = _float(M.F)
    norm = float(np.max(np.abs(np.linalg.eigvalsh(F)), initial=0.0))
    if norm <= 1.0:
        return F, 1.0
    if not rescale:
        raise ConventionError(f"{M.name}: spectrum of F^2 exceeds 1 (|F| = {norm:.4g})")
    logger.info("rescaling F of %s by 1/%.6g", M.name, norm)
    return F / norm, 1.0 / norm


@dataclass
class Doubled:
    """F' = diag(F, -F) and F~ = [[F, S], [S, -F]] over a shared A+."""

    prime: FredholmModule
    tilde: FredholmModule
    scale: float


def doubled_modules(M: FredholmModule, rescale: bool = True) -> Doubled:
    F, scale = _scaled(M, rescale)
    lam, V = np.linalg.eigh(F @ F)
    S = V @ np.diag(np.sqrt(np.clip(1.0 - lam, 0.0, None))) @ V.conj().T
    algebra = _doubled_algebra(M.algebra)
    g = _doubled_gamma(M)
    tilde = FredholmModule(algebra, np.block([[F, S], [S, -F]]), g, f"{M.name}~").validate()
    zero = np.zeros_like(F)
    prime = FredholmModule(algebra, np.block([[F, zero], [zero, -F]]), g, f"{M.name}'").validate()
    return Doubled(prime, tilde, scale)


def tilde_module(M: FredholmModule, rescale: bool = True) -> FredholmModule:
    """F~ with F~^2 = 1 on H (+) H; F is rescaled first when |F| > 1."""
    return doubled_modules(M, rescale).tilde


def prime_module(M: FredholmModule, rescale: bool = True) -> FredholmModule:
    return doubled_modules(M, rescale).prime


def lift_to_unitization(e: KClass, algebra: FiniteAlgebra) -> KClass:
    """e over A as a class over A+ (no unit component), float coordinates."""
    K = e.algebra.kernel

    def up(x: np.ndarray) -> np.ndarray:
        return algebra.vector([0] + [K.to_complex(v) for v in x])

    entries = [[up(x) for x in row] for row in e.entries]
    inverse = None if e.inverse is None else [[up(x) for x in row] for row in e.inverse]
    return KClass(algebra, e.kind, entries, inverse)


def amplify(M: FredholmModule, N: int) -> FredholmModule:
    """M_N(A) on C^N (x) H."""
    K = M.kernel
    algebra = tensor(matrix_algebra(N, K), M.algebra)
    gamma = None if M.gamma is None else K.kron(K.identity(N), M.gamma)
    return FredholmModule(algebra, K.kron(K.identity(N), M.F), gamma, f"M_{N}({M.name})")


def connes_homotopy(M: FredholmModule, e: KClass, tol: float = 1e-9) -> Tuple[FredholmModule, OperatorHomotopy]:
    """
    F_t = F + t (1 - 2e)[F, e] on C^N (x) H for a selfadjoint projection e;
    F_1 commutes with e.
    """
    big = float_module(amplify(M, e.N))
    E = _float(e.represent())
    if np.max(np.abs(E - E.conj().T), initial=0.0) > tol or np.max(np.abs(E @ E - E), initial=0.0) > tol:
        raise ConventionError("the Connes homotopy needs a selfadjoint projection")
    F = big.F
    G = (np.eye(E.shape[0]) - 2 * E) @ (F @ E - E @ F)
    return big, OperatorHomotopy([F, G], big.gamma)


def commuting_pairing(M: FredholmModule, e: KClass, m: int) -> complex:
    """m!/m! Tr gamma e (1 - F_1^2)^m for the endpoint F_1 of the Connes homotopy."""
    big, h = connes_homotopy(M, e)
    E = _float(e.represent())
    F1 = h.at(1.0)
    P = np.linalg.matrix_power(np.eye(F1.shape[0]) - F1 @ F1, m)
    return complex(np.trace(big.gamma @ E @ P))


@dataclass
class CoinReport:
    prime_trace: float
    tilde_defect: float
    coboundary: ResidualReport
    pairings: List[Tuple[complex, complex]]
    scale: float
    tol: float

    @property
    def passed(self) -> bool:
        return (self.prime_trace <= self.tol and self.tilde_defect <= self.tol and self.coboundary.passed
                and all(abs(a - b) <= self.tol for a, b in self.pairings))

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "prime_trace": self.prime_trace, "tilde_defect": self.tilde_defect,
                "coboundary": self.coboundary.to_dict(), "scale": self.scale, "tol": self.tol,
                "pairings": [[str(a), str(b)] for a, b in self.pairings]}


def verify_theorem_coin(M: FredholmModule, m: int, idempotents: Sequence[KClass] = (), tol: float = 1e-6,
                        **kwargs: Any) -> CoinReport:
    """
    F' and F~ give cohomologous characters over A+: Tr gamma (1 - F'^2)^m = 0,
    Ch(F~) - Ch(F') = (b+B) Tch along the linear path, and the pairings with
    e and e (+) 0 agree. F is rescaled into the unit ball first.
    """
    if not M.even:
        raise ConventionError("the coincidence check is stated for even modules")
    doubled = doubled_modules(M)
    prime, tilde = doubled.prime, doubled.tilde
    g = prime.gamma
    P = np.linalg.matrix_power(np.eye(prime.dim) - prime.F @ prime.F, m)
    prime_trace = abs(np.trace(g @ P))
    tilde_defect = float(np.max(np.abs(tilde.F @ tilde.F - np.eye(tilde.dim))))
    h = OperatorHomotopy.linear(prime.F, tilde.F, g)
    with timed("coincidence coboundary on %s", M.name):
        T = transgression(prime, h, m)
        cob = compare(bb(T), ch_even(tilde, m) - ch_even(prime, m), tol,
                      label=f"coincidence {M.name}", **kwargs)
    base = float_module(M)
    if doubled.scale != 1.0:
        base = FredholmModule(base.algebra, base.F * doubled.scale, base.gamma, base.name)
    pairings = []
    for e in idempotents:
        ef = KClass(base.algebra, e.kind, [[np.asarray(_float(x), dtype=complex) for x in row]
                                            for row in e.entries])
        pairings.append((complex(index_pairing(base, ef, m)),
                         complex(index_pairing(tilde, lift_to_unitization(e, tilde.algebra), m))))
    return CoinReport(float(prime_trace), tilde_defect, cob, pairings, doubled.scale, tol)


# reference modules


def rank_one_module(kernel: Any = "exact") -> FredholmModule:
    """H+ = C^2, H- = C, F+ = (1, 0) over A = C: 1 - F^2 = diag(0, 1, 0), index 1."""
    K = get_kernel(kernel)
    A = represented(matrix_algebra(1, K), [K.identity(3)], "C")
    F = [[0, 0, 1], [0, 0, 0], [1, 0, 0]]
    return even_module(A, F, [[1, 0, 0], [0, 1, 0], [0, 0, -1]], "rank-one")


def unit_class(M: FredholmModule) -> KClass:
    return KClass.idempotent(M.algebra, [[M.algebra.unit()]])


def random_even_module(rng: np.random.Generator, r: int = 2, plus: int = 2, minus: int = 1,
                       scale: float = 1.0) -> FredholmModule:
    """M_r acting by a (x) 1 on C^r (x) (C^plus (+) C^minus) with a random odd F."""
    s = plus + minus
    A = matrix_algebra(r, "float")
    A = represented(A, [np.kron(R, np.eye(s)) for R in A.representation], f"M_{r}")
    g = np.kron(np.eye(r), np.diag([1.0] * plus + [-1.0] * minus)).astype(complex)
    X = rng.normal(size=(r * s, r * s)) + 1j * rng.normal(size=(r * s, r * s))
    Pp = (np.eye(r * s) + g) / 2
    Pm = (np.eye(r * s) - g) / 2
    T = Pm @ X @ Pp
    F = scale * (T + T.conj().T)
    return even_module(A, F, g, f"random({r},{plus},{minus})")


def random_projection(rng: np.random.Generator, algebra: FiniteAlgebra, N: int = 1, rank: Optional[int] = None,
                      selfadjoint: bool = True) -> KClass:
    """A projection in M_N(M_r), conjugated by a random invertible unless selfadjoint."""
    r = int(round(math.sqrt(algebra.dim)))
    n = N * r
    rank = rank if rank is not None else max(1, n // 2)
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, _ = np.linalg.qr(X)
    P = Q[:, :rank] @ Q[:, :rank].conj().T
    if not selfadjoint:
        S = np.eye(n) + 0.3 * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
        P = S @ P @ np.linalg.inv(S)
    return KClass.from_blocks(algebra, P, "idempotent", tol=1e-8)


def random_odd_module(rng: np.random.Generator, r: int = 2, s: int = 2, gap: float = 0.25) -> FredholmModule:
    """M_r acting by a (x) 1 on C^r (x) C^s with a random selfadjoint F, |eigenvalues| >= gap."""
    n = r * s
    A = matrix_algebra(r, "float")
    A = represented(A, [np.kron(R, np.eye(s)) for R in A.representation], f"M_{r}")
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    lam, V = np.linalg.eigh(X + X.conj().T)
    lam = np.where(np.abs(lam) < gap, np.where(lam < 0, -gap, gap), lam)
    return odd_module(A, V @ np.diag(lam) @ V.conj().T, f"random-odd({r},{s})")


def random_unitary(rng: np.random.Generator, algebra: FiniteAlgebra, N: int = 1) -> KClass:
    r = int(round(math.sqrt(algebra.dim)))
    n = N * r
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, R = np.linalg.qr(X)
    Q = Q @ np.diag(np.diag(R) / np.abs(np.diag(R)))
    return KClass.from_blocks(algebra, Q, "unitary", tol=1e-8)


@dataclass
class WindingReport:
    modes: int
    pairing: complex
    total_flow: int
    window_flow: int

    def to_dict(self) -> Dict[str, Any]:
        return {"modes": self.modes, "pairing": [self.pairing.real, self.pairing.imag],
                "total_flow": self.total_flow, "window_flow": self.window_flow}


def winding_module(K: int = 4) -> Tuple[FredholmModule, KClass]:
    """
    Fourier modes k = -K..K, F = sign(k) with sign(0) = 1, and C[Z/(2K+1)] generated
    by the cyclic shift z e_k = e_{k+1}; u = z.
    """
    n = 2 * K + 1
    A = cyclic_group_algebra(n, kernel="float")
    F = np.diag([1.0 if k >= 0 else -1.0 for k in range(-K, K + 1)]).astype(complex)
    M = odd_module(A, F, f"winding({K})")
    u = KClass.unitary(A, [[A.basis_vector(1 % n)]])
    return M, u


def winding_reference(K: int = 4, m: int = 0, tol: float = 1e-9) -> WindingReport:
    """
    In finite dimensions the pairing and the total flow from F to u* F u vanish; the
    crossings of the modes |k| < K, away from the wrap-around edge, give the winding.
    """
    M, u = winding_module(K)
    pairing = sf_pairing(M, u, m)
    total = unitary_spectral_flow(M, u, tol).value
    F, Fu = conjugated(M, u)
    start, end = np.real(np.diag(F)), np.real(np.diag(Fu))
    window = 0
    for i, k in enumerate(range(-K, K + 1)):
        if abs(k) < K:
            window += int(start[i] < 0 < end[i]) - int(end[i] < 0 < start[i])
    return WindingReport(2 * K + 1, pairing, total, window)
