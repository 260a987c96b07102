"""Scalar arithmetic backends, special functions, determinant engines, quadrature.

Two arithmetic modes live behind a common context interface:

* exact mode — ``fractions.Fraction`` values, closed under +, -, *, / with no
  rounding.  Used wherever the moment structure is provably rational, so that
  identity residuals can be checked against literal zero.
* real mode — arbitrary-precision floats from a private mpmath context at a
  fixed number of decimal digits.  Cauchy-type moment matrices become
  ill-conditioned fast, so double precision is useless beyond 4x4 blocks and
  every real-mode path carries an explicit digit budget.

A computation sticks to one context; matrices reject mixed entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import mpmath

from .errors import (
    DomainError,
    ModeError,
    PrecisionError,
    QuadratureError,
    ShapeError,
)

# Real-mode determinants raise once fewer than this many digits survive.
MIN_RELIABLE_DIGITS = 10


class ExactContext:
    """Arithmetic on exact rationals."""

    mode = "exact"
    dps = None

    def scalar(self, x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, str):
            return Fraction(x)
        raise ModeError(f"cannot coerce {type(x).__name__} into exact mode")

    def is_scalar(self, x) -> bool:
        return isinstance(x, (Fraction, int))

    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def gamma(self, x):
        x = self.scalar(x)
        if x <= 0:
            raise DomainError(f"gamma requires x > 0, got {x}")
        if x.denominator != 1:
            raise ModeError(f"gamma({x}) is irrational; use real mode")
        return Fraction(math.factorial(x.numerator - 1))

    def power(self, x, e):
        e = self.scalar(e)
        if e.denominator != 1:
            raise ModeError(f"exact mode cannot raise to fractional power {e}")
        return self.scalar(x) ** e.numerator

    def abs(self, x):
        return abs(x)

    def to_float(self, x) -> float:
        return float(x)

    def encode(self, x) -> str:
        x = self.scalar(x)
        return f"{x.numerator}/{x.denominator}"

    def decode(self, s: str):
        return Fraction(s)

    def __repr__(self):
        return "ExactContext()"


class RealContext:
    """Arithmetic on mpmath floats at a fixed decimal precision.

    Each instance owns a cloned mpmath context, so different precisions can
    coexist and a foreign mpf is rejected by ``is_scalar``.
    """

    mode = "real"

    def __init__(self, dps: int):
        if dps < 5:
            raise ValueError("need at least 5 digits")
        self.dps = dps
        self.mp = mpmath.mp.clone()
        self.mp.dps = dps

    def scalar(self, x):
        if isinstance(x, Fraction):
            return self.mp.mpf(x.numerator) / self.mp.mpf(x.denominator)
        return self.mp.mpf(x)

    def is_scalar(self, x) -> bool:
        return isinstance(x, self.mp.mpf)

    def zero(self):
        return self.mp.mpf(0)

    def one(self):
        return self.mp.mpf(1)

    def gamma(self, x):
        x = self.scalar(x)
        if x <= 0:
            raise DomainError(f"gamma requires x > 0, got {x}")
        return self.mp.gamma(x)

    def power(self, x, e):
        return self.mp.power(self.scalar(x), self.scalar(e))

    def exp(self, x):
        return self.mp.exp(self.scalar(x))

    def abs(self, x):
        return abs(x)

    def to_float(self, x) -> float:
        return float(x)

    def encode(self, x) -> str:
        return mpmath.nstr(x, self.dps + 5)

    def decode(self, s: str):
        return self.mp.mpf(s)

    def __repr__(self):
        return f"RealContext(dps={self.dps})"


_REAL_CACHE: dict[int, RealContext] = {}
EXACT = ExactContext()


def real_context(dps: int) -> RealContext:
    """Shared context per precision, so quadrature node caches persist."""
    ctx = _REAL_CACHE.get(dps)
    if ctx is None:
        ctx = _REAL_CACHE[dps] = RealContext(dps)
    return ctx


def context_for(mode: str, dps: int | None = None):
    if mode == "exact":
        return EXACT
    if mode == "real":
        return real_context(dps if dps is not None else 50)
    raise ModeError(f"unknown arithmetic mode {mode!r}")


def with_escalating_precision(requested: int, compute):
    """Run ``compute(ctx)`` starting at max(50, requested) digits.

    On a PrecisionError the digit budget doubles, up to four escalations.
    """
    dps = max(50, requested)
    last = None
    for _ in range(5):
        try:
            return compute(real_context(dps))
        except PrecisionError as exc:
            last = exc
            dps *= 2
    raise PrecisionError(
        f"precision exhausted after escalating to {dps // 2} digits: {last}",
        digits_lost=getattr(last, "digits_lost", None),
    )


# ---------------------------------------------------------------------------
# special functions


def gamma(x, prec: int | None = None):
    """Gamma function; exact factorial at positive integers, else mpf at ``prec``."""
    if prec is None:
        return EXACT.gamma(x)
    return real_context(prec).gamma(x)


def pochhammer(a, m: int):
    """Rising factorial (a)_m = a (a+1) ... (a+m-1), with (a)_0 = 1.

    Exact for Fraction/int input, floating otherwise.
    """
    if m < 0:
        raise DomainError("pochhammer needs m >= 0")
    if isinstance(a, (int, Fraction)):
        a = Fraction(a)
        out = Fraction(1)
    else:
        out = a * 0 + 1  # one, in a's own scalar type
    for i in range(m):
        out = out * (a + i)
    return out


# ---------------------------------------------------------------------------
# matrices and determinants


class DenseMatrix:
    """Immutable rectangular matrix with entries from one arithmetic context."""

    __slots__ = ("entries", "rows", "cols", "ctx")

    def __init__(self, entries, ctx):
        rows = [tuple(ctx.scalar(v) for v in row) for row in entries]
        if not rows:
            raise ShapeError("matrix needs at least one row")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ShapeError("ragged rows")
        self.entries = tuple(rows)
        self.rows = len(rows)
        self.cols = width
        self.ctx = ctx

    def __setattr__(self, name, value):
        if name in self.__slots__ and hasattr(self, "ctx"):
            raise AttributeError("DenseMatrix is immutable")
        object.__setattr__(self, name, value)

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def at(self, i: int, j: int):
        return self.entries[i][j]

    def row(self, i: int):
        return self.entries[i]

    def with_row(self, i: int, new_row) -> "DenseMatrix":
        rows = list(self.entries)
        rows[i] = tuple(new_row)
        return DenseMatrix(rows, self.ctx)

    def minor_removing(self, drop_rows, drop_cols) -> "DenseMatrix":
        """Submatrix after deleting the given 0-based rows and columns."""
        dr, dc = set(drop_rows), set(drop_cols)
        rows = [
            [v for j, v in enumerate(r) if j not in dc]
            for i, r in enumerate(self.entries)
            if i not in dr
        ]
        return DenseMatrix(rows, self.ctx)

    def __repr__(self):
        return f"DenseMatrix({self.rows}x{self.cols}, {self.ctx})"


def _det_bareiss(rows) -> Fraction:
    # Fraction-free (division-controlled) elimination; every interior division
    # is exact, keeping intermediate growth polynomial.
    n = len(rows)
    a = [list(r) for r in rows]
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if swap is None:
                return Fraction(0)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
            a[i][k] = Fraction(0)
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _det_pivoted(rows, ctx: RealContext):
    # Partial pivoting; loss estimate is the Hadamard ratio
    # log10(prod ||row_i|| / |det|), which bounds the cancellation incurred.
    n = len(rows)
    mp = ctx.mp
    a = [list(r) for r in rows]
    hadamard = mp.mpf(1)
    for r in a:
        hadamard *= mp.sqrt(sum(v * v for v in r))
    sign = 1
    for k in range(n):
        piv = max(range(k, n), key=lambda r: abs(a[r][k]))
        if a[piv][k] == 0:
            return mp.mpf(0), float(ctx.dps)
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            for j in range(k + 1, n):
                a[i][j] -= f * a[k][j]
            a[i][k] = mp.mpf(0)
    det = mp.mpf(sign)
    for i in range(n):
        det *= a[i][i]
    if det == 0 or hadamard == 0:
        lost = 0.0
    else:
        lost = max(0.0, float(mp.log10(hadamard / abs(det))))
    return det, lost


def det(m: DenseMatrix, return_loss: bool = False):
    """Determinant of a square matrix.

    Exact mode runs Bareiss elimination and the result is a Fraction.  Real
    mode runs pivoted elimination and tracks an estimate of the decimal digits
    lost to cancellation; if fewer than MIN_RELIABLE_DIGITS survive, a
    PrecisionError asks the caller to escalate.
    """
    if not m.is_square:
        raise ShapeError(f"determinant needs a square matrix, got {m.rows}x{m.cols}")
    if m.ctx.mode == "exact":
        value, lost = _det_bareiss(m.entries), 0.0
    else:
        value, lost = _det_pivoted(m.entries, m.ctx)
        if m.ctx.dps - lost < MIN_RELIABLE_DIGITS:
            raise PrecisionError(
                f"determinant lost ~{lost:.1f} of {m.ctx.dps} digits",
                digits_lost=lost,
            )
    return (value, lost) if return_loss else value


def det_t_derivative(m: DenseMatrix, dm: DenseMatrix):
    """d/dt det(M(t)) given the entrywise derivative matrix.

    Row-replacement form: sum over r of det(M with row r replaced by dM row r).
    """
    if not m.is_square:
        raise ShapeError("det_t_derivative needs square matrices")
    if (m.rows, m.cols) != (dm.rows, dm.cols):
        raise ShapeError("matrix and derivative matrix shapes differ")
    total = m.ctx.zero()
    for r in range(m.rows):
        total += det(m.with_row(r, dm.row(r)))
    return total


def solve_linear(matrix_rows, rhs, mode: str):
    """Solve A x = b by Gaussian elimination over scalars or Jets.

    Exact mode pivots on the first nonzero entry; real mode on the largest
    magnitude.  Jet entries propagate first derivatives through the solve.
    """
    n = len(matrix_rows)
    a = [list(matrix_rows[i]) + [rhs[i]] for i in range(n)]

    def mag(x):
        v = x.val if isinstance(x, Jet) else x
        return abs(v)

    for c in range(n):
        if mode == "exact":
            piv = next((r for r in range(c, n) if mag(a[r][c]) != 0), None)
        else:
            piv = max(range(c, n), key=lambda r: mag(a[r][c]))
            if mag(a[piv][c]) == 0:
                piv = None
        if piv is None:
            raise ShapeError("singular linear system")
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
        for r in range(c + 1, n):
            if mag(a[r][c]) == 0:
                continue
            f = a[r][c] / a[c][c]
            for cc in range(c, n + 1):
                a[r][cc] = a[r][cc] - f * a[c][cc]
    x = [None] * n
    for r in range(n - 1, -1, -1):
        s = a[r][n]
        for cc in range(r + 1, n):
            s = s - a[r][cc] * x[cc]
        x[r] = s / a[r][r]
    return x


# ---------------------------------------------------------------------------
# first-order jets (value + exact t-derivative)


class Jet:
    """Pair (value, d/dt value) with forward-mode derivative propagation.

    Components stay in whatever scalar mode they were seeded with, so chains
    of rational operations on exact seeds keep derivatives exact.
    """

    __slots__ = ("val", "dot")

    def __init__(self, val, dot=0):
        self.val = val
        self.dot = dot

    @staticmethod
    def lift(x):
        return x if isinstance(x, Jet) else Jet(x, 0)

    def __add__(self, o):
        o = Jet.lift(o)
        return Jet(self.val + o.val, self.dot + o.dot)

    __radd__ = __add__

    def __sub__(self, o):
        o = Jet.lift(o)
        return Jet(self.val - o.val, self.dot - o.dot)

    def __rsub__(self, o):
        return Jet.lift(o) - self

    def __mul__(self, o):
        o = Jet.lift(o)
        return Jet(self.val * o.val, self.dot * o.val + self.val * o.dot)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = Jet.lift(o)
        return Jet(
            self.val / o.val,
            (self.dot * o.val - self.val * o.dot) / (o.val * o.val),
        )

    def __rtruediv__(self, o):
        return Jet.lift(o) / self

    def __neg__(self):
        return Jet(-self.val, -self.dot)

    def __repr__(self):
        return f"Jet({self.val}, dot={self.dot})"


# ---------------------------------------------------------------------------
# symbolic gamma-factor bookkeeping


@dataclass(frozen=True)
class GammaTerm:
    """A rational coefficient times a product of Gamma factors at rational args.

    Keeping the Gamma factors symbolic lets structurally-cancelling sums (the
    hat-family inner products) be verified in exact rationals; real-mode
    collapse happens only at final evaluation.
    """

    coeff: Fraction
    gammas: tuple = ()  # sorted ((argument, exponent), ...), exponents nonzero

    @staticmethod
    def of(coeff) -> "GammaTerm":
        return GammaTerm(Fraction(coeff))

    @staticmethod
    def gamma_factor(arg, exponent: int = 1) -> "GammaTerm":
        return GammaTerm(Fraction(1), ((Fraction(arg), exponent),))

    def _merged(self, other_gammas, negate=False):
        acc = dict(self.gammas)
        for arg, e in other_gammas:
            e = -e if negate else e
            acc[arg] = acc.get(arg, 0) + e
            if acc[arg] == 0:
                del acc[arg]
        return tuple(sorted(acc.items()))

    def __mul__(self, o):
        if isinstance(o, GammaTerm):
            return GammaTerm(self.coeff * o.coeff, self._merged(o.gammas))
        return GammaTerm(self.coeff * Fraction(o), self.gammas)

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, GammaTerm):
            return GammaTerm(self.coeff / o.coeff, self._merged(o.gammas, negate=True))
        return GammaTerm(self.coeff / Fraction(o), self.gammas)

    def __add__(self, o):
        if not isinstance(o, GammaTerm):
            o = GammaTerm.of(o)
        if self.gammas != o.gammas:
            raise ValueError("cannot add GammaTerms with different Gamma content")
        return GammaTerm(self.coeff + o.coeff, self.gammas)

    @property
    def is_rational(self) -> bool:
        return not self.gammas

    def rational(self) -> Fraction:
        if self.gammas:
            raise ModeError(f"uncancelled Gamma factors remain: {self.gammas}")
        return self.coeff

    def evaluate(self, ctx: RealContext):
        out = ctx.scalar(self.coeff)
        for arg, e in self.gammas:
            out *= ctx.gamma(arg) ** e
        return out


# ---------------------------------------------------------------------------
# half-line quadrature


@dataclass
class HalflineIntegrand:
    """Descriptor for integrands x^c * w(x) * p(x) with exponential decay.

    ``fn(ctx, x)`` evaluates the full integrand at x > 0 inside the given
    real context.
    """

    fn: Callable
    name: str = ""
    singular_power: float = 0.0


def integrate_halfline(integrand, prec: int):
    """Integrate over (0, inf) by a node-doubling double-exponential rule.

    The tanh-sinh levels double their node count; integration stops when two
    successive levels agree to prec/2 digits (mpmath's reported error is that
    successive-level difference).  Raises QuadratureError if the level budget
    is exhausted first.
    """
    if callable(integrand):
        integrand = HalflineIntegrand(fn=lambda ctx, x, _f=integrand: _f(ctx, x))
    ctx = real_context(prec + 10)
    target_digits = (prec + 1) // 2
    f = lambda x: integrand.fn(ctx, x)
    last_err = None
    for maxdegree in (6, 8, 10):
        value, err = ctx.mp.quad(f, [0, ctx.mp.inf], error=True, maxdegree=maxdegree)
        scale = max(ctx.mp.mpf(1), abs(value))
        if err <= scale * ctx.mp.mpf(10) ** (-target_digits):
            return real_context(prec).scalar(value)
        last_err = err
    raise QuadratureError(
        f"half-line quadrature{' of ' + integrand.name if integrand.name else ''} "
        f"did not reach {target_digits} digits (last error {mpmath.nstr(last_err, 5)})"
    )
