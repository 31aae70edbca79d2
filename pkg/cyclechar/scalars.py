"""
Scalar kernels.

Two kernels back every computation:

    exact   elements of QQ_I[tau] (sympy polynomial ring over the Gaussian
            rationals), where tau stands for 2*pi*i. Fourier derivatives only
            ever produce integer multiples of 2*pi*i, so the ring is closed
            under everything the torus backends do.
    float   python/numpy complex128 with explicit tolerances.

Usage:
    from cyclechar.scalars import get_kernel

    K = get_kernel("exact")
    x = K.scalar("3/7") * K.tau()
    K.to_complex(x)
"""

from fractions import Fraction
from functools import lru_cache
import cmath
import math
from typing import Any, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from sympy.polys.domains import QQ_I
from sympy.polys.rings import PolyElement, ring

from .errors import ExactnessError
from .logger import logger

RingScalar = Any
Number = Union[int, Fraction, float, complex, str]

_RING, _TAU = ring("tau", QQ_I)


@lru_cache(maxsize=4096)
def _gaussian(re: Fraction, im: Fraction) -> PolyElement:
    value = sympy.Rational(re.numerator, re.denominator) + sympy.I * sympy.Rational(im.numerator, im.denominator)
    return _RING.ground_new(QQ_I.from_sympy(value))


def _as_fraction_pair(value: Any) -> Tuple[Fraction, Fraction]:
    if isinstance(value, bool):
        return Fraction(int(value)), Fraction(0)
    if isinstance(value, (int, Fraction)):
        return Fraction(value), Fraction(0)
    if isinstance(value, str):
        return Fraction(value.strip()), Fraction(0)
    if isinstance(value, (tuple, list)) and len(value) == 2:
        re, _ = _as_fraction_pair(value[0])
        im, _ = _as_fraction_pair(value[1])
        return re, im
    if isinstance(value, complex):
        if value.real != int(value.real) or value.imag != int(value.imag):
            raise ExactnessError(f"inexact complex literal in exact kernel: {value!r}")
        return Fraction(int(value.real)), Fraction(int(value.imag))
    if isinstance(value, float):
        if value != int(value):
            raise ExactnessError(f"inexact float literal in exact kernel: {value!r}")
        return Fraction(int(value)), Fraction(0)
    raise ExactnessError(f"cannot read {value!r} as an exact scalar")


def _scalar_box(s: Any) -> np.ndarray:
    box = np.empty((), dtype=object)
    box[()] = s
    return box


class Kernel:
    """Common interface. Subclasses fix the scalar representation."""

    name = "abstract"
    exact = False
    dtype: Any = object

    def scalar(self, value: Any) -> RingScalar:
        raise NotImplementedError

    def zero(self) -> RingScalar:
        return self.scalar(0)

    def one(self) -> RingScalar:
        return self.scalar(1)

    def tau(self) -> RingScalar:
        raise NotImplementedError

    def to_complex(self, x: Any) -> complex:
        raise NotImplementedError

    def conj(self, x: Any) -> RingScalar:
        raise NotImplementedError

    def is_zero(self, x: Any, tol: float = 0.0) -> bool:
        raise NotImplementedError

    def total(self, values: Iterable[Any]) -> RingScalar:
        """Sum in a fixed order; floating kernels round the exact sum once."""
        out = self.zero()
        for v in values:
            out = out + v
        return out

    def magnitude(self, x: Any) -> float:
        return abs(self.to_complex(x))

    def phase(self, r: Fraction) -> RingScalar:
        """e^{-2 pi i r}."""
        raise NotImplementedError

    def format(self, x: Any) -> str:
        z = self.to_complex(x)
        return f"{z.real:.12g}{z.imag:+.12g}j"

    # matrices

    def matrix(self, rows: Any) -> np.ndarray:
        arr = np.asarray(rows, dtype=object)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        out = np.empty(arr.shape, dtype=self.dtype)
        for idx in np.ndindex(arr.shape):
            out[idx] = self.scalar(arr[idx])
        return out

    def zeros(self, n: int, m: Optional[int] = None) -> np.ndarray:
        m = n if m is None else m
        if self.exact:
            out = np.empty((n, m), dtype=object)
            for idx in np.ndindex(out.shape):
                out[idx] = 0
            return out
        return np.zeros((n, m), dtype=complex)

    def identity(self, n: int) -> np.ndarray:
        out = self.zeros(n)
        for i in range(n):
            out[i, i] = 1
        return out

    def scale(self, M: np.ndarray, s: Any) -> np.ndarray:
        """M * s with the array on the left (ring scalars do not coerce arrays)."""
        if self.exact:
            return M * _scalar_box(s)
        return M * complex(s)

    def mat_is_zero(self, M: np.ndarray, tol: float = 0.0) -> bool:
        return all(self.is_zero(x, tol) for x in np.asarray(M).flat)

    def mat_residual(self, M: np.ndarray) -> float:
        arr = np.asarray(M)
        if arr.size == 0:
            return 0.0
        return max(self.magnitude(x) for x in arr.flat)

    def trace(self, M: np.ndarray) -> RingScalar:
        total = 0
        for i in range(min(M.shape)):
            total = total + M[i, i]
        return total

    def adjoint(self, M: np.ndarray) -> np.ndarray:
        """Conjugate transpose."""
        if not self.exact:
            return np.asarray(M, dtype=complex).conj().T
        out = np.empty((M.shape[1], M.shape[0]), dtype=object)
        for i, j in np.ndindex(M.shape):
            out[j, i] = self.conj(M[i, j])
        return out

    def kron(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        if not self.exact:
            return np.kron(A, B)
        n1, m1 = A.shape
        n2, m2 = B.shape
        out = np.empty((n1 * n2, m1 * m2), dtype=object)
        for i in range(n1):
            for j in range(m1):
                out[i * n2:(i + 1) * n2, j * m2:(j + 1) * m2] = self.scale(B, A[i, j])
        return out

    def to_numpy(self, M: np.ndarray) -> np.ndarray:
        arr = np.asarray(M)
        out = np.empty(arr.shape, dtype=complex)
        for idx in np.ndindex(arr.shape):
            out[idx] = self.to_complex(arr[idx])
        return out


class ExactKernel(Kernel):
    name = "exact"
    exact = True
    dtype = object

    def scalar(self, value: Any) -> RingScalar:
        if isinstance(value, PolyElement):
            return value
        re, im = _as_fraction_pair(value)
        return _gaussian(re, im)

    def tau(self) -> RingScalar:
        return _TAU

    def to_complex(self, x: Any) -> complex:
        if isinstance(x, (int, Fraction, float, complex)):
            return complex(x)
        if not isinstance(x, PolyElement):
            raise ExactnessError(f"not an exact scalar: {x!r}")
        two_pi_i = 2j * math.pi
        total = 0j
        for (e,), c in x.terms():
            total += complex(float(c.x), float(c.y)) * two_pi_i ** e
        return total

    def conj(self, x: Any) -> RingScalar:
        x = self.scalar(x)
        out = _RING.zero
        for (e,), c in x.terms():
            term = _RING.ground_new(QQ_I.from_sympy(sympy.conjugate(QQ_I.to_sympy(c))))
            out = out + term * (-_TAU) ** e
        return out

    def is_zero(self, x: Any, tol: float = 0.0) -> bool:
        return x == 0

    def phase(self, r: Fraction) -> RingScalar:
        r = Fraction(r)
        four_r = r * 4
        if four_r.denominator != 1:
            logger.error("phase e^(-2 pi i r) not in Q(i): r=%s", r)
            raise ExactnessError(f"translation phase for r={r} is not a Gaussian rational")
        return self.scalar({0: 1, 1: (0, -1), 2: -1, 3: (0, 1)}[four_r.numerator % 4])

    def exact_value(self, x: Any) -> Tuple[Fraction, ...]:
        """Flat rational coordinates, used to compare ring elements in reports."""
        x = self.scalar(x)
        out = []
        for (e,), c in sorted(x.terms()):
            out.extend([Fraction(e), Fraction(int(c.x.numerator), int(c.x.denominator)),
                        Fraction(int(c.y.numerator), int(c.y.denominator))])
        return tuple(out)

    def format(self, x: Any) -> str:
        if isinstance(x, int):
            return str(x)
        return str(self.scalar(x).as_expr()).replace("tau", "(2*pi*I)")


class FloatKernel(Kernel):
    name = "float"
    exact = False
    dtype = complex

    def scalar(self, value: Any) -> complex:
        if isinstance(value, PolyElement):
            return EXACT.to_complex(value)
        if isinstance(value, str):
            return complex(float(Fraction(value.strip())))
        if isinstance(value, (tuple, list)) and len(value) == 2:
            return complex(float(Fraction(str(value[0]))), float(Fraction(str(value[1]))))
        if isinstance(value, Fraction):
            return complex(float(value))
        return complex(value)

    def tau(self) -> complex:
        return 2j * math.pi

    def to_complex(self, x: Any) -> complex:
        if isinstance(x, PolyElement):
            return EXACT.to_complex(x)
        return complex(x)

    def conj(self, x: Any) -> complex:
        return complex(x).conjugate()

    def is_zero(self, x: Any, tol: float = 0.0) -> bool:
        return abs(complex(x)) <= tol

    def total(self, values: Iterable[Any]) -> complex:
        zs = [complex(v) for v in values]
        return complex(math.fsum(z.real for z in zs), math.fsum(z.imag for z in zs))

    def phase(self, r: Fraction) -> complex:
        return cmath.exp(-2j * math.pi * float(r))


EXACT = ExactKernel()
FLOAT = FloatKernel()


def get_kernel(name: Union[str, Kernel]) -> Kernel:
    if isinstance(name, Kernel):
        return name
    if name == "exact":
        return EXACT
    if name == "float":
        return FLOAT
    logger.error("unknown kernel: %s", name)
    raise ValueError(f"unknown kernel: {name}")


def factorial_fraction(num: Sequence[int], den: Sequence[int]) -> Fraction:
    """prod(num_i!) / prod(den_j!)."""
    top = 1
    for n in num:
        top *= math.factorial(n)
    bottom = 1
    for n in den:
        bottom *= math.factorial(n)
    return Fraction(top, bottom)
