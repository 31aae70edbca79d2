"""
The (b, B)-bicomplex over a finite-dimensional algebra.

Conventions (reported by `conventions()`):

    (b phi)(a0..a_{k+1}) = sum_{i=0}^{k} (-1)^i phi(.., a_i a_{i+1}, ..)
                           + (-1)^{k+1} phi(a_{k+1} a0, a1, .., a_k)
    B = A o B0, for phi of degree n:
        (B0 phi)(a0..a_{n-1}) = phi(1, a0..a_{n-1}) - (-1)^n phi(a0..a_{n-1}, 1)
        (A psi)(a0..a_{n-1})  = sum_j (-1)^{(n-1) j} psi(a_j..a_{n-1}, a0..a_{j-1})
    S places every component unchanged in total degree n + 2 (constant 1).

Usage:
    from cyclechar.cyclic import matrix_algebra, random_cochain, hochschild_b

    A = matrix_algebra(2)
    phi = random_cochain(A, 1, np.random.default_rng(0))
    residual_report(BBCochain(A, 2, {2: hochschild_b(hochschild_b(phi))}))
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import product
import cmath
import math
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import BackendMismatchError, ConventionError, ExactnessError
from .graded import GradedAlgebra, GradedElement
from .logger import logger, timed
from .scalars import Kernel, get_kernel

S_NORMALIZATION = 1

_SIGN_INJECTION = False
_BUDGET = 10 ** 6
_SAMPLES = 200
_THREADS = 1


def set_sign_injection(flag: bool) -> None:
    """Flip the sign of B (negative control for the bicomplex identities)."""
    global _SIGN_INJECTION
    _SIGN_INJECTION = bool(flag)
    if _SIGN_INJECTION:
        logger.warning("sign injection enabled: B is negated")


def configure(budget: Optional[int] = None, samples: Optional[int] = None,
              threads: Optional[int] = None) -> None:
    global _BUDGET, _SAMPLES, _THREADS
    if budget is not None:
        _BUDGET = int(budget)
    if samples is not None:
        _SAMPLES = int(samples)
    if threads is not None:
        _THREADS = max(1, int(threads))


def conventions() -> Dict[str, Any]:
    return {
        "b": "sum_{i<=k} (-1)^i phi(..a_i a_{i+1}..) + (-1)^{k+1} phi(a_{k+1} a_0, a_1..a_k)",
        "B": "A o B0; B0 phi = phi(1, ..) - (-1)^n phi(.., 1); A = sum_j (-1)^{(n-1)j} rotation^j",
        "B_sign": -1 if _SIGN_INJECTION else 1,
        "S": "identity placement in total degree n+2",
        "S_normalization": S_NORMALIZATION,
        "ch_idempotent": "ch_0 = tr e, ch_2k = (-1)^k (2k)!/k! tr((e-1/2) (x) e^(x)2k)",
        "ch_unitary": "1/(2 sqrt(2 pi i)) sum_l (-1)^l (l-1)! tr((u (x) u^-1)^l - (u^-1 (x) u)^l)",
        "sqrt_2pii_branch": "principal, sqrt(2 pi) e^{i pi/4}",
    }


# algebras


class Algebra:
    """What cochains need from an algebra: a finite basis (or spanning sample) and products."""

    kernel: Kernel
    name = "algebra"
    unit_index: Optional[int] = None

    def basis(self) -> List[Any]:
        raise NotImplementedError

    @property
    def size(self) -> int:
        return len(self.basis())

    def mul(self, x: Any, y: Any) -> Any:
        raise NotImplementedError

    def add(self, x: Any, y: Any) -> Any:
        return x + y

    def scale(self, x: Any, s: Any) -> Any:
        raise NotImplementedError

    def zero(self) -> Any:
        raise NotImplementedError

    def unit(self) -> Any:
        raise ConventionError(f"algebra {self.name} is not unital; unitize first")

    @property
    def unital(self) -> bool:
        return False

    def is_zero(self, x: Any) -> bool:
        raise NotImplementedError

    def words(self, xs: Sequence[Any]) -> Any:
        out = xs[0]
        for x in xs[1:]:
            out = self.mul(out, x)
        return out


class FiniteAlgebra(Algebra):
    """
    Algebra with basis e_0..e_{dim-1} and e_i e_j = sum_k c[i, j, k] e_k.
    Elements are coordinate vectors.
    """

    def __init__(self, structure: np.ndarray, kernel: Any = "exact", unit: Optional[Sequence[Any]] = None,
                 representation: Optional[Sequence[np.ndarray]] = None,
                 star: Optional[np.ndarray] = None, name: str = "A", check: bool = True,
                 unit_index: Optional[int] = None):
        self.kernel = get_kernel(kernel)
        K = self.kernel
        structure = np.asarray(structure, dtype=object)
        self.dim = structure.shape[0]
        if structure.shape != (self.dim,) * 3:
            raise ConventionError(f"structure constants must be dim^3, got {structure.shape}")
        self._table: List[List[List[Tuple[int, Any]]]] = [[[] for _ in range(self.dim)] for _ in range(self.dim)]
        for i, j, k in np.ndindex(structure.shape):
            c = K.scalar(structure[i, j, k])
            if not K.is_zero(c):
                self._table[i][j].append((k, c))
        self._unit = None if unit is None else self.vector(unit)
        self.representation = None if representation is None else [np.asarray(R) for R in representation]
        self.star_matrix = star
        self.name = name
        self.unit_index = unit_index
        self._basis = [self.basis_vector(i) for i in range(self.dim)]
        if check:
            self.check_associativity()
            self.check_unit()

    def vector(self, coords: Sequence[Any]) -> np.ndarray:
        K = self.kernel
        out = np.empty(self.dim, dtype=K.dtype)
        for i, c in enumerate(coords):
            out[i] = K.scalar(c)
        return out

    def basis_vector(self, i: int) -> np.ndarray:
        out = self.zero()
        out[i] = 1
        return out

    def basis(self) -> List[np.ndarray]:
        return self._basis

    def zero(self) -> np.ndarray:
        if self.kernel.exact:
            out = np.empty(self.dim, dtype=object)
            out[:] = 0
            return out
        return np.zeros(self.dim, dtype=complex)

    def mul(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        K = self.kernel
        out = self.zero()
        xs = [(i, v) for i, v in enumerate(x) if not K.is_zero(v)]
        ys = [(j, v) for j, v in enumerate(y) if not K.is_zero(v)]
        for i, a in xs:
            row = self._table[i]
            for j, b in ys:
                ab = a * b
                for k, c in row[j]:
                    out[k] = out[k] + ab * c
        return out

    def scale(self, x: np.ndarray, s: Any) -> np.ndarray:
        return self.kernel.scale(x, self.kernel.scalar(s))

    def is_zero(self, x: np.ndarray) -> bool:
        return self.kernel.mat_is_zero(x)

    @property
    def unital(self) -> bool:
        return self._unit is not None

    def unit(self) -> np.ndarray:
        if self._unit is None:
            return super().unit()
        return self._unit

    def unit_functional(self) -> Callable[[np.ndarray], Any]:
        """A linear functional taking the value 1 on the unit."""
        u = self.unit()
        K = self.kernel
        i = next(i for i, v in enumerate(u) if not K.is_zero(v))
        if not K.is_zero(u[i] - 1, 1e-12):
            raise ConventionError(f"unit of {self.name} has no unit coordinate")
        return lambda x: x[i]

    def represent(self, x: np.ndarray) -> np.ndarray:
        if self.representation is None:
            raise ConventionError(f"algebra {self.name} has no matrix representation")
        K = self.kernel
        out = None
        for v, R in zip(x, self.representation):
            if K.is_zero(v):
                continue
            term = K.scale(R, v)
            out = term if out is None else out + term
        if out is None:
            n = self.representation[0].shape[0]
            return K.zeros(n)
        return out

    def star(self, x: np.ndarray) -> np.ndarray:
        if self.star_matrix is None:
            raise ConventionError(f"algebra {self.name} has no involution")
        K = self.kernel
        conj = np.array([K.conj(v) for v in x], dtype=K.dtype)
        return np.asarray(self.star_matrix, dtype=K.dtype) @ conj

    def check_associativity(self, exhaustive_dim: int = 6, samples: int = 64, seed: int = 0) -> float:
        K = self.kernel
        basis = self.basis()
        if self.dim <= exhaustive_dim:
            triples = product(range(self.dim), repeat=3)
        else:
            rng = np.random.default_rng(seed)
            logger.warning("associativity of %s checked on %d random triples", self.name, samples)
            triples = [tuple(rng.integers(0, self.dim, size=3)) for _ in range(samples)]
        worst = 0.0
        for i, j, k in triples:
            x, y, z = basis[i], basis[j], basis[k]
            r = K.mat_residual(self.mul(self.mul(x, y), z) - self.mul(x, self.mul(y, z)))
            worst = max(worst, r)
        if worst > (0.0 if K.exact else 1e-12):
            logger.error("structure constants of %s are not associative: residual=%g", self.name, worst)
            raise ConventionError(f"structure constants of {self.name} are not associative")
        return worst

    def check_unit(self) -> None:
        if self._unit is None:
            return
        K = self.kernel
        for x in self.basis():
            r = max(K.mat_residual(self.mul(self._unit, x) - x), K.mat_residual(self.mul(x, self._unit) - x))
            if r > (0.0 if K.exact else 1e-12):
                logger.error("unit of %s is not two-sided: residual=%g", self.name, r)
                raise ConventionError(f"unit of {self.name} is not a two-sided unit")


def matrix_algebra(N: int, kernel: Any = "exact") -> FiniteAlgebra:
    """M_N with basis E_ab (index a*N + b), represented by itself."""
    K = get_kernel(kernel)
    dim = N * N
    c = np.zeros((dim, dim, dim), dtype=object)
    reps = []
    star = np.zeros((dim, dim), dtype=object)
    for a, b in product(range(N), repeat=2):
        for b2, d in product(range(N), repeat=2):
            if b == b2:
                c[a * N + b, b2 * N + d, a * N + d] = 1
        E = K.zeros(N)
        E[a, b] = 1
        reps.append(E)
        star[b * N + a, a * N + b] = 1
    unit = [1 if a == b else 0 for a, b in product(range(N), repeat=2)]
    return FiniteAlgebra(c, K, unit, reps, star, f"M_{N}")


def diagonal_algebra(n: int, kernel: Any = "exact") -> FiniteAlgebra:
    K = get_kernel(kernel)
    c = np.zeros((n, n, n), dtype=object)
    reps = []
    for i in range(n):
        c[i, i, i] = 1
        E = K.zeros(n)
        E[i, i] = 1
        reps.append(E)
    star = np.eye(n, dtype=int).astype(object)
    return FiniteAlgebra(c, K, [1] * n, reps, star, f"C^{n}")


def dual_numbers(kernel: Any = "exact") -> FiniteAlgebra:
    """C[eps]/(eps^2), represented by [[x, y], [0, x]]."""
    K = get_kernel(kernel)
    c = np.zeros((2, 2, 2), dtype=object)
    c[0, 0, 0] = c[0, 1, 1] = c[1, 0, 1] = 1
    return FiniteAlgebra(c, K, [1, 0], [K.identity(2), K.matrix([[0, 1], [0, 0]])], None, "C[eps]")


def strict_upper(N: int, kernel: Any = "exact") -> FiniteAlgebra:
    """Strictly upper triangular N x N matrices: a nonunital (nilpotent) algebra."""
    K = get_kernel(kernel)
    pairs = [(a, b) for a in range(N) for b in range(N) if a < b]
    index = {p: i for i, p in enumerate(pairs)}
    dim = len(pairs)
    c = np.zeros((dim, dim, dim), dtype=object)
    reps = []
    for (a, b), i in index.items():
        for (b2, d), j in index.items():
            if b == b2:
                c[i, j, index[(a, d)]] = 1
        E = K.zeros(N)
        E[a, b] = 1
        reps.append(E)
    return FiniteAlgebra(c, K, None, reps, None, f"N_{N}")


def cyclic_group_algebra(n: int, generator: Optional[np.ndarray] = None, kernel: Any = "exact") -> FiniteAlgebra:
    """C[Z/n] with basis g^0..g^{n-1}; `generator` represents g (the cyclic shift by default)."""
    K = get_kernel(kernel)
    c = np.zeros((n, n, n), dtype=object)
    star = np.zeros((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            c[i, j, (i + j) % n] = 1
        star[(-i) % n, i] = 1
    if generator is None:
        generator = K.zeros(n)
        for i in range(n):
            generator[(i + 1) % n, i] = 1
    reps = [K.identity(generator.shape[0])]
    for _ in range(1, n):
        reps.append(reps[-1] @ generator)
    return FiniteAlgebra(c, K, [1] + [0] * (n - 1), reps, star, f"C[Z/{n}]")


def unitize(A: FiniteAlgebra) -> FiniteAlgebra:
    """A+ = C1 + A, the adjoined unit as basis element 0 represented by the identity."""
    K = A.kernel
    dim = A.dim + 1
    c = np.zeros((dim, dim, dim), dtype=object)
    for i in range(dim):
        c[0, i, i] = 1
        c[i, 0, i] = 1
    for i in range(A.dim):
        for j in range(A.dim):
            for k, v in A._table[i][j]:
                c[i + 1, j + 1, k + 1] = v
    reps = None
    if A.representation is not None:
        reps = [K.identity(A.representation[0].shape[0])] + list(A.representation)
    star = None
    if A.star_matrix is not None:
        star = np.zeros((dim, dim), dtype=object)
        star[0, 0] = 1
        star[1:, 1:] = np.asarray(A.star_matrix, dtype=object)
    return FiniteAlgebra(c, K, [1] + [0] * A.dim, reps, star, f"{A.name}+", unit_index=0)


def tensor(A: FiniteAlgebra, B: FiniteAlgebra) -> FiniteAlgebra:
    """A (x) B with basis e_i (x) f_j at index i*dim(B) + j."""
    if A.kernel is not B.kernel:
        raise BackendMismatchError("tensor factors use different scalar kernels")
    K = A.kernel
    dim = A.dim * B.dim
    c = np.zeros((dim, dim, dim), dtype=object)
    for i1, j1 in product(range(A.dim), repeat=2):
        for k1, v1 in A._table[i1][j1]:
            for i2, j2 in product(range(B.dim), repeat=2):
                for k2, v2 in B._table[i2][j2]:
                    c[i1 * B.dim + i2, j1 * B.dim + j2, k1 * B.dim + k2] = v1 * v2
    unit = None
    if A.unital and B.unital:
        unit = [a * b for a in A.unit() for b in B.unit()]
    reps = None
    if A.representation is not None and B.representation is not None:
        reps = [K.kron(R, S) for R in A.representation for S in B.representation]
    return FiniteAlgebra(c, K, unit, reps, None, f"{A.name}(x){B.name}")


def represented(A: FiniteAlgebra, matrices: Sequence[np.ndarray], name: Optional[str] = None) -> FiniteAlgebra:
    """Same structure constants with a different representation (e.g. a (x) 1 on H)."""
    structure = np.zeros((A.dim,) * 3, dtype=object)
    for i in range(A.dim):
        for j in range(A.dim):
            for k, v in A._table[i][j]:
                structure[i, j, k] = v
    return FiniteAlgebra(structure, A.kernel, None if not A.unital else list(A.unit()), matrices,
                         A.star_matrix, name or A.name, check=False, unit_index=A.unit_index)


def to_float(A: FiniteAlgebra) -> FiniteAlgebra:
    """The same algebra over the floating kernel."""
    if not A.kernel.exact:
        return A
    K = A.kernel
    structure = np.zeros((A.dim,) * 3, dtype=complex)
    for i in range(A.dim):
        for j in range(A.dim):
            for k, v in A._table[i][j]:
                structure[i, j, k] = K.to_complex(v)
    unit = None if not A.unital else [K.to_complex(v) for v in A.unit()]
    reps = None if A.representation is None else [K.to_numpy(R) for R in A.representation]
    return FiniteAlgebra(structure, "float", unit, reps, A.star_matrix, A.name, check=False,
                         unit_index=A.unit_index)


class ElementAlgebra(Algebra):
    """Degree-0 elements of a graded algebra, probed through a finite spanning sample."""

    def __init__(self, graded: GradedAlgebra, sample: Sequence[GradedElement], name: str = "elements"):
        self.graded = graded
        self.kernel = graded.kernel
        self.sample = list(sample)
        self.name = name

    def basis(self) -> List[GradedElement]:
        return self.sample

    def mul(self, x: GradedElement, y: GradedElement) -> GradedElement:
        return x * y

    def scale(self, x: GradedElement, s: Any) -> GradedElement:
        return x.scale(s)

    def zero(self) -> GradedElement:
        return self.graded.zero()

    @property
    def unital(self) -> bool:
        return self.graded.unital

    def unit(self) -> GradedElement:
        return self.graded.one()

    def is_zero(self, x: GradedElement) -> bool:
        return x.is_zero()


# cochains


def _contract(T: np.ndarray, args: Sequence[np.ndarray]) -> Any:
    v = T
    for x in args:
        v = np.tensordot(np.asarray(x), v, axes=([0], [0]))
    return np.asarray(v).item()


class Cochain:
    """(k+1)-linear functional, lazy (closure) or dense (coefficient tensor over the basis)."""

    __slots__ = ("algebra", "degree", "_fn", "dense", "name")

    def __init__(self, algebra: Algebra, degree: int, fn: Optional[Callable[[Tuple[Any, ...]], Any]] = None,
                 dense: Optional[np.ndarray] = None, name: str = "cochain"):
        if fn is None and dense is None:
            raise ConventionError("a cochain needs an evaluator or a dense tensor")
        if degree < 0:
            raise ConventionError(f"cochain degree must be >= 0, got {degree}")
        self.algebra = algebra
        self.degree = degree
        self._fn = fn
        self.dense = dense
        self.name = name

    def __call__(self, *args: Any) -> Any:
        if len(args) != self.degree + 1:
            raise ConventionError(f"{self.name} takes {self.degree + 1} arguments, got {len(args)}")
        if self.dense is not None:
            return _contract(self.dense, args)
        return self._fn(args)

    def on_basis(self, idx: Tuple[int, ...]) -> Any:
        if self.dense is not None:
            return self.dense[idx]
        basis = self.algebra.basis()
        return self._fn(tuple(basis[i] for i in idx))

    def lazy(self) -> "Cochain":
        """The same functional forced through its closure form."""
        if self._fn is not None:
            return Cochain(self.algebra, self.degree, self._fn, None, self.name)
        T = self.dense
        return Cochain(self.algebra, self.degree, lambda a: _contract(T, a), None, self.name)

    def densify(self, budget: Optional[int] = None, threads: Optional[int] = None) -> "Cochain":
        A = self.algebra
        if not isinstance(A, FiniteAlgebra):
            raise ConventionError("dense cochains need a FiniteAlgebra")
        if self.dense is not None:
            return self
        budget = _BUDGET if budget is None else budget
        shape = (A.dim,) * (self.degree + 1)
        count = int(np.prod(shape))
        if count > budget:
            raise ConventionError(f"dense tensor of {count} scalars exceeds the budget {budget}")
        tuples = list(np.ndindex(shape))
        values = evaluate_tuples(self, tuples, threads)
        T = np.empty(shape, dtype=A.kernel.dtype)
        for idx, v in zip(tuples, values):
            T[idx] = v
        return Cochain(A, self.degree, None, T, self.name)

    def _combine(self, other: "Cochain", sign: int) -> "Cochain":
        if other.algebra is not self.algebra:
            raise BackendMismatchError("cochains live over different algebras")
        if other.degree != self.degree:
            raise ConventionError(f"cannot add cochains of degree {self.degree} and {other.degree}")
        if self.dense is not None and other.dense is not None:
            return Cochain(self.algebra, self.degree, None, self.dense + other.dense * sign, self.name)
        f, g = self, other
        if sign > 0:
            return Cochain(self.algebra, self.degree, lambda a: f(*a) + g(*a), None, self.name)
        return Cochain(self.algebra, self.degree, lambda a: f(*a) - g(*a), None, self.name)

    def __add__(self, other: "Cochain") -> "Cochain":
        return self._combine(other, 1)

    def __sub__(self, other: "Cochain") -> "Cochain":
        return self._combine(other, -1)

    def scale(self, s: Any) -> "Cochain":
        K = self.algebra.kernel
        s = K.scalar(s)
        if self.dense is not None:
            return Cochain(self.algebra, self.degree, None, K.scale(self.dense, s), self.name)
        f = self
        return Cochain(self.algebra, self.degree, lambda a: f(*a) * s, None, self.name)

    def __neg__(self) -> "Cochain":
        return self.scale(-1)


def zero_cochain(algebra: Algebra, degree: int) -> Cochain:
    z = algebra.kernel.zero()
    return Cochain(algebra, degree, lambda a: z, None, "0")


def random_cochain(algebra: FiniteAlgebra, degree: int, rng: np.random.Generator,
                   normalized: bool = False, entry_range: int = 2) -> Cochain:
    """Dense random cochain; `normalized` makes it vanish when an argument in position >= 1 is 1."""
    K = algebra.kernel
    shape = (algebra.dim,) * (degree + 1)
    count = int(np.prod(shape))
    if K.exact:
        parts = rng.integers(-entry_range, entry_range + 1, size=(count, 2))
        T = np.empty(count, dtype=object)
        for i, (re, im) in enumerate(parts):
            T[i] = K.scalar((int(re), int(im)))
        T = T.reshape(shape)
    else:
        T = (rng.normal(size=count) + 1j * rng.normal(size=count)).reshape(shape)
    phi = Cochain(algebra, degree, None, T, "random")
    if not normalized or degree == 0:
        return phi
    lam = algebra.unit_functional()
    one = algebra.unit()

    def project(x: np.ndarray) -> np.ndarray:
        return x - algebra.scale(one, lam(x))

    return Cochain(algebra, degree, lambda a: phi(a[0], *[project(x) for x in a[1:]]), None,
                   "random-normalized").densify()


def hochschild_b(phi: Cochain) -> Cochain:
    A = phi.algebra
    k = phi.degree

    def fn(args: Tuple[Any, ...]) -> Any:
        total = A.kernel.zero()
        for i in range(k + 1):
            merged = args[:i] + (A.mul(args[i], args[i + 1]),) + args[i + 2:]
            v = phi(*merged)
            total = total + v if i % 2 == 0 else total - v
        v = phi(A.mul(args[k + 1], args[0]), *args[1:k + 1])
        return total + v if (k + 1) % 2 == 0 else total - v

    return Cochain(A, k + 1, fn, None, f"b({phi.name})")


def connes_B(phi: Cochain) -> Optional[Cochain]:
    """Connes' B; a degree-0 input has no image (returns None)."""
    n = phi.degree
    if n == 0:
        return None
    A = phi.algebra
    one = A.unit()
    flip = -1 if _SIGN_INJECTION else 1

    def b0(xs: Tuple[Any, ...]) -> Any:
        v = phi(one, *xs)
        w = phi(*xs, one)
        return v - w if n % 2 == 0 else v + w

    def fn(args: Tuple[Any, ...]) -> Any:
        total = A.kernel.zero()
        for j in range(n):
            v = b0(args[j:] + args[:j])
            total = total + v if (n - 1) * j % 2 == 0 else total - v
        return total * flip if flip < 0 else total

    return Cochain(A, n - 1, fn, None, f"B({phi.name})")


class BBCochain:
    """Total-degree-n cochain: components phi_k, k = n, n-2, ..; missing ones are zero."""

    def __init__(self, algebra: Algebra, degree: int, components: Optional[Dict[int, Cochain]] = None,
                 name: str = "cochain"):
        self.algebra = algebra
        self.degree = degree
        self.name = name
        self.components: Dict[int, Cochain] = {}
        for k, c in (components or {}).items():
            if c is None:
                continue
            if (k - degree) % 2 or k < 0 or k > degree:
                raise ConventionError(f"component {k} does not fit total degree {degree}")
            if c.degree != k:
                raise ConventionError(f"component {k} holds a degree-{c.degree} cochain")
            self.components[k] = c

    @property
    def parity(self) -> int:
        return self.degree % 2

    def ks(self) -> List[int]:
        return list(range(self.parity, self.degree + 1, 2))

    def component(self, k: int) -> Cochain:
        return self.components.get(k) or zero_cochain(self.algebra, k)

    def _combine(self, other: "BBCochain", sign: int) -> "BBCochain":
        if other.degree != self.degree:
            raise ConventionError(f"cannot add total degrees {self.degree} and {other.degree}")
        out = {}
        for k in sorted(set(self.components) | set(other.components)):
            a, b = self.components.get(k), other.components.get(k)
            if a is None:
                out[k] = b if sign > 0 else -b
            elif b is None:
                out[k] = a
            else:
                out[k] = a + b if sign > 0 else a - b
        return BBCochain(self.algebra, self.degree, out, self.name)

    def __add__(self, other: "BBCochain") -> "BBCochain":
        return self._combine(other, 1)

    def __sub__(self, other: "BBCochain") -> "BBCochain":
        return self._combine(other, -1)

    def scale(self, s: Any) -> "BBCochain":
        return BBCochain(self.algebra, self.degree, {k: c.scale(s) for k, c in self.components.items()},
                         self.name)

    def __neg__(self) -> "BBCochain":
        return self.scale(-1)

    def densify(self) -> "BBCochain":
        return BBCochain(self.algebra, self.degree, {k: c.densify() for k, c in self.components.items()},
                         self.name)


def bb(phi: BBCochain) -> BBCochain:
    """(b + B) phi, of total degree n + 1."""
    out = {}
    for k in range((phi.degree + 1) % 2, phi.degree + 2, 2):
        parts = []
        if k - 1 in phi.components:
            parts.append(hochschild_b(phi.components[k - 1]))
        if k + 1 in phi.components:
            parts.append(connes_B(phi.components[k + 1]))
        if not parts:
            continue
        out[k] = parts[0] if len(parts) == 1 else parts[0] + parts[1]
    return BBCochain(phi.algebra, phi.degree + 1, out, f"(b+B){phi.name}")


def shift_S(phi: BBCochain) -> BBCochain:
    out = {k: c.scale(S_NORMALIZATION) if S_NORMALIZATION != 1 else c for k, c in phi.components.items()}
    return BBCochain(phi.algebra, phi.degree + 2, out, f"S{phi.name}")


# evaluation


def evaluate_tuples(phi: Cochain, tuples: Sequence[Tuple[int, ...]], threads: Optional[int] = None) -> List[Any]:
    threads = _THREADS if threads is None else max(1, threads)
    if threads == 1 or len(tuples) < 2 * threads:
        return [phi.on_basis(t) for t in tuples]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(phi.on_basis, tuples))


def basis_tuples(size: int, arity: int, budget: Optional[int] = None, samples: Optional[int] = None,
                 seed: int = 0) -> Tuple[List[Tuple[int, ...]], bool]:
    """All index tuples when within budget, otherwise a seeded random sample."""
    budget = _BUDGET if budget is None else budget
    samples = _SAMPLES if samples is None else samples
    count = size ** arity
    if count <= budget:
        return list(product(range(size), repeat=arity)), True
    rng = np.random.default_rng(seed)
    logger.warning("%d tuples exceed the budget %d, sampling %d", count, budget, samples)
    return [tuple(int(v) for v in rng.integers(0, size, size=arity)) for _ in range(samples)], False


@dataclass
class ResidualReport:
    label: str
    tol: float
    max_residual: float = 0.0
    evaluated: int = 0
    exhaustive: bool = True
    exact_zero: bool = True
    per_component: Dict[int, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["passed"] = self.passed
        out["per_component"] = {str(k): v for k, v in self.per_component.items()}
        return out


def residual_report(phi: BBCochain, tol: float = 0.0, label: Optional[str] = None,
                    budget: Optional[int] = None, samples: Optional[int] = None, seed: int = 0,
                    threads: Optional[int] = None) -> ResidualReport:
    """Largest |phi_k(basis tuple)| over every component."""
    K = phi.algebra.kernel
    report = ResidualReport(label or phi.name, tol)
    size = phi.algebra.size
    for k, c in sorted(phi.components.items()):
        tuples, exhaustive = basis_tuples(size, k + 1, budget, samples, seed)
        with timed("evaluate %s component %d on %d tuples", report.label, k, len(tuples)):
            values = evaluate_tuples(c, tuples, threads)
        worst = 0.0
        for v in values:
            if not K.is_zero(v):
                report.exact_zero = False
                worst = max(worst, K.magnitude(v))
        report.per_component[k] = worst
        report.max_residual = max(report.max_residual, worst)
        report.evaluated += len(tuples)
        report.exhaustive = report.exhaustive and exhaustive
    logger.debug("residual %s: max=%.3g evaluated=%d exhaustive=%s", report.label, report.max_residual,
                 report.evaluated, report.exhaustive)
    return report


def is_bb_cocycle(phi: BBCochain, tol: float = 0.0, **kwargs: Any) -> ResidualReport:
    return residual_report(bb(phi), tol, kwargs.pop("label", f"cocycle {phi.name}"), **kwargs)


def compare(phi: BBCochain, psi: BBCochain, tol: float = 0.0, **kwargs: Any) -> ResidualReport:
    return residual_report(phi - psi, tol, kwargs.pop("label", f"{phi.name} vs {psi.name}"), **kwargs)


# K-theory


class KClass:
    """Idempotent or unitary in M_N(A); entries are algebra elements."""

    def __init__(self, algebra: FiniteAlgebra, kind: str, entries: List[List[np.ndarray]],
                 inverse: Optional[List[List[np.ndarray]]] = None):
        if kind not in ("idempotent", "unitary"):
            raise ConventionError(f"unknown K-class kind: {kind}")
        self.algebra = algebra
        self.kind = kind
        self.entries = entries
        self.inverse = inverse

    @property
    def N(self) -> int:
        return len(self.entries)

    @classmethod
    def idempotent(cls, algebra: FiniteAlgebra, entries: List[List[np.ndarray]], tol: float = 1e-9) -> "KClass":
        e = cls(algebra, "idempotent", entries)
        r = _mat_residual(algebra, _mat_mul(algebra, entries, entries), entries)
        if r > (0.0 if algebra.kernel.exact else tol):
            logger.error("not an idempotent: |e^2 - e| = %g", r)
            raise ConventionError(f"e^2 != e (residual {r:.3g})")
        return e

    @classmethod
    def unitary(cls, algebra: FiniteAlgebra, entries: List[List[np.ndarray]],
                inverse: Optional[List[List[np.ndarray]]] = None, tol: float = 1e-9) -> "KClass":
        if inverse is None:
            N = len(entries)
            inverse = [[algebra.star(entries[b][a]) for b in range(N)] for a in range(N)]
        one = _mat_identity(algebra, len(entries))
        r = max(_mat_residual(algebra, _mat_mul(algebra, entries, inverse), one),
                _mat_residual(algebra, _mat_mul(algebra, inverse, entries), one))
        if r > (0.0 if algebra.kernel.exact else tol):
            logger.error("not a unitary: |u u* - 1| = %g", r)
            raise ConventionError(f"u is not unitary (residual {r:.3g})")
        return cls(algebra, "unitary", entries, inverse)

    @classmethod
    def from_blocks(cls, algebra: FiniteAlgebra, M: np.ndarray, kind: str = "idempotent",
                    tol: float = 1e-9) -> "KClass":
        """M in M_N(M_r) given as an (N r) x (N r) matrix; `algebra` must be matrix_algebra(r)."""
        r = int(round(math.sqrt(algebra.dim)))
        N = M.shape[0] // r
        entries = [[algebra.vector(M[a * r:(a + 1) * r, b * r:(b + 1) * r].reshape(-1)) for b in range(N)]
                   for a in range(N)]
        if kind == "idempotent":
            return cls.idempotent(algebra, entries, tol)
        return cls.unitary(algebra, entries, tol=tol)

    def represent(self) -> np.ndarray:
        """The operator on C^N (x) H: block (a, b) is the image of entry (a, b)."""
        A = self.algebra
        rows = [np.concatenate([A.represent(x) for x in row], axis=1) for row in self.entries]
        return np.concatenate(rows, axis=0)


def _mat_mul(A: Algebra, X: List[List[Any]], Y: List[List[Any]]) -> List[List[Any]]:
    N = len(X)
    out = []
    for a in range(N):
        row = []
        for c in range(N):
            acc = A.zero()
            for b in range(N):
                acc = A.add(acc, A.mul(X[a][b], Y[b][c]))
            row.append(acc)
        out.append(row)
    return out


def _mat_identity(A: Algebra, N: int) -> List[List[Any]]:
    return [[A.unit() if a == b else A.zero() for b in range(N)] for a in range(N)]


def _mat_residual(A: FiniteAlgebra, X: List[List[np.ndarray]], Y: List[List[np.ndarray]]) -> float:
    K = A.kernel
    return max(K.mat_residual(x - y) for rx, ry in zip(X, Y) for x, y in zip(rx, ry))


@dataclass
class HomologyChain:
    """Sum of coef * (a0 (x) .. (x) a_k), grouped by degree k."""

    algebra: Algebra
    parity: int
    terms: Dict[int, List[Tuple[Any, Tuple[Any, ...]]]] = field(default_factory=dict)

    def degrees(self) -> List[int]:
        return sorted(k for k, v in self.terms.items() if v)

    def is_zero(self) -> bool:
        return not self.degrees()

    def truncate(self, top: int) -> "HomologyChain":
        return HomologyChain(self.algebra, self.parity, {k: v for k, v in self.terms.items() if k <= top})


def _cyclic_words(A: Algebra, factors: Sequence[List[List[Any]]]) -> List[Tuple[Any, ...]]:
    """tr(x0 (x) x1 (x) .. (x) x_k) expanded over index cycles, dropping zero words."""
    N = len(factors[0])
    k = len(factors)
    out = []
    for idx in product(range(N), repeat=k):
        word = tuple(factors[j][idx[j]][idx[(j + 1) % k]] for j in range(k))
        if any(A.is_zero(x) for x in word):
            continue
        out.append(word)
    return out


def chern_idempotent(e: KClass, top: int = 6) -> HomologyChain:
    """ch_0 = tr e, ch_2k = (-1)^k (2k)!/k! tr((e - 1/2) (x) e^(x)2k), up to degree `top`."""
    if e.kind != "idempotent":
        raise ConventionError("chern_idempotent needs an idempotent")
    A = e.algebra
    chain = HomologyChain(A, 0)
    chain.terms[0] = [(Fraction(1), w) for w in _cyclic_words(A, [e.entries])]
    if top < 2:
        return chain
    half = A.scale(A.unit(), Fraction(1, 2))
    shifted = [[A.add(x, A.scale(half, -1)) if a == b else x for b, x in enumerate(row)]
               for a, row in enumerate(e.entries)]
    for k in range(1, top // 2 + 1):
        coef = Fraction((-1) ** k * math.factorial(2 * k), math.factorial(k))
        words = _cyclic_words(A, [shifted] + [e.entries] * (2 * k))
        chain.terms[2 * k] = [(coef, w) for w in words]
    return chain


def chern_unitary(u: KClass, top: int = 5) -> HomologyChain:
    """Odd chain in degrees 1, 3, .. <= top; floating kernel only (irrational constant)."""
    if u.kind != "unitary":
        raise ConventionError("chern_unitary needs a unitary")
    A = u.algebra
    if A.kernel.exact:
        raise ExactnessError("the odd Chern character has an irrational constant; use the float kernel")
    root = cmath.sqrt(2j * math.pi)
    chain = HomologyChain(A, 1)
    for l in range(1, (top + 1) // 2 + 1):
        coef = (-1) ** l * math.factorial(l - 1) / (2 * root)
        plus = _cyclic_words(A, [u.entries, u.inverse] * l)
        minus = _cyclic_words(A, [u.inverse, u.entries] * l)
        chain.terms[2 * l - 1] = [(coef, w) for w in plus] + [(-coef, w) for w in minus]
    return chain


def pair(phi: BBCochain, chain: HomologyChain) -> Any:
    if phi.parity != chain.parity:
        logger.error("parity mismatch: cochain degree %d vs chain parity %d", phi.degree, chain.parity)
        raise ConventionError("cochain and chain have different parity")
    K = phi.algebra.kernel
    return K.total(c(*word) * K.scalar(coef) for k, c in sorted(phi.components.items())
                   for coef, word in chain.terms.get(k, ()))


@dataclass
class ReducedReport:
    max_residual: float
    unit_value: float
    evaluated: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol and self.unit_value <= self.tol


def reduced_check(phi: BBCochain, tol: float = 0.0, budget: Optional[int] = None) -> ReducedReport:
    """Components vanish with the adjoined unit in any position >= 1, and phi_0(1) = 0."""
    A = phi.algebra
    if A.unit_index is None:
        raise ConventionError("reduced_check expects a unitization")
    K = A.kernel
    u = A.unit_index
    worst = 0.0
    evaluated = 0
    for k, c in sorted(phi.components.items()):
        if k == 0:
            continue
        tuples, _ = basis_tuples(A.size, k, budget)
        for rest in tuples:
            for pos in range(1, k + 1):
                idx = rest[:pos] + (u,) + rest[pos:]
                worst = max(worst, K.magnitude(c.on_basis(idx)))
                evaluated += 1
    unit_value = K.magnitude(phi.components[0].on_basis((u,))) if 0 in phi.components else 0.0
    return ReducedReport(worst, unit_value, evaluated, tol)
