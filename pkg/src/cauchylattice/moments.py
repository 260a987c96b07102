"""Bi-moment and single-moment tables for the Cauchy-kernel inner product.

The inner product couples two half-line measures through the kernel
1/(x+y); its bi-moments

    I_{j,k} = integral x^{t1(j-1)} y^{t2(k-1)} / (x+y) dmu1 dmu2,   t_i = 1/k_i,

drive every construction downstream.  For Laguerre-type measures
dmu1 = x^a e^((t-1)x) dx, dmu2 = y^b e^((t-1)y) dy the moments have the
closed form

    I_{j,k}(t) = (1-t)^(-e) Gamma(1+a+t1(j-1)) Gamma(1+b+t2(k-1)) / e,
    e = 1 + a + b + t1(j-1) + t2(k-1),

rational whenever t1 = t2 = 1, a, b are integers and t is rational; that is
the exact-mode fast path.  A second exact path (the "rational core") stores
only the 1/e part and carries the two Gamma factors symbolically as per-row /
per-column prefactors, so that prefactor-homogeneous checks (orthogonality
residuals, normalisation ratios) stay exact for any rational a, b, t_i.

Time dependence is realised as dmu(.;t) = e^(tx) dmu, under which the exact
derivative of every moment is the index-shift rule

    d/dt I_{j,k} = I_{j+k1,k} + I_{j,k+k2},      d/dt phi_l = phi_{l+k}.

Tables are immutable after build and sized up front: the shift rule consumes
k1 (or k2) extra indices per derivative order, and tables never silently
extend.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from . import numerics
from .errors import (
    ConfigError,
    DegeneracyError,
    DomainError,
    ModeError,
    RangeError,
)
from .numerics import DenseMatrix, HalflineIntegrand, Jet, det, integrate_halfline

SCHEMA_VERSION = 1


def _as_param(value):
    """Normalise a weight parameter: rationals stay exact, floats stay floats."""
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        return value
    raise ConfigError(f"cannot interpret parameter {value!r}")


@dataclass(frozen=True)
class CustomWeight:
    """Callable weight w(x) on the half line with exponential decay.

    ``fn(ctx, x)`` must evaluate inside the given real context.
    """

    fn: Callable
    name: str = "custom"


@dataclass(frozen=True)
class ModelParams:
    """Weight family, exponents, lattice integers, time and arithmetic mode."""

    weight: str = "laguerre"
    a: object = 0
    b: object = 0
    k1: int = 1
    k2: int = 1
    t: object = 0
    mode: str = "exact"
    prec: int = 50
    core: bool = False
    w1: Optional[CustomWeight] = None
    w2: Optional[CustomWeight] = None

    def __post_init__(self):
        object.__setattr__(self, "a", _as_param(self.a))
        object.__setattr__(self, "b", _as_param(self.b))
        object.__setattr__(self, "t", _as_param(self.t))
        if self.weight not in ("laguerre", "custom"):
            raise ConfigError(f"unknown weight family {self.weight!r}")
        if not (isinstance(self.k1, int) and isinstance(self.k2, int)):
            raise ConfigError("k1, k2 must be integers")
        if self.k1 < 1 or self.k2 < 1:
            raise ConfigError("k1, k2 must be >= 1")
        if self.mode not in ("exact", "real"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if isinstance(self.a, Fraction) and self.a < 0:
            raise ConfigError("a must be >= 0")
        if isinstance(self.b, Fraction) and self.b < 0:
            raise ConfigError("b must be >= 0")
        if self.weight == "laguerre":
            if isinstance(self.t, Fraction) and self.t >= 1:
                raise DomainError("Laguerre time factor requires t < 1")
            if isinstance(self.t, float) and self.t >= 1:
                raise DomainError("Laguerre time factor requires t < 1")
        if self.weight == "custom":
            if self.mode != "real":
                raise ModeError("custom weights require real mode")
            if self.w1 is None or self.w2 is None:
                raise ConfigError("custom weight family needs w1 and w2")
        if self.mode == "exact":
            if self.weight != "laguerre":
                raise ModeError("exact mode needs the Laguerre family")
            rational = isinstance(self.a, Fraction) and isinstance(self.b, Fraction) and isinstance(self.t, Fraction)
            if not rational:
                raise ModeError("exact mode needs rational a, b, t")
            if self.core:
                if self.t != 0:
                    raise ModeError("the rational-core table is built at t = 0")
            elif not (
                self.k1 == 1
                and self.k2 == 1
                and self.a.denominator == 1
                and self.b.denominator == 1
            ):
                raise ModeError(
                    "exact mode without the rational core needs k1 = k2 = 1 "
                    "and integer a, b"
                )

    @property
    def theta1(self) -> Fraction:
        return Fraction(1, self.k1)

    @property
    def theta2(self) -> Fraction:
        return Fraction(1, self.k2)

    @property
    def is_symmetric(self) -> bool:
        return (
            self.a == self.b
            and self.k1 == self.k2
            and self.w1 is self.w2
        )

    def context(self):
        return numerics.context_for(self.mode, self.prec)

    def swapped(self) -> "ModelParams":
        """Mirror of the model with the two sides exchanged."""
        return ModelParams(
            weight=self.weight,
            a=self.b,
            b=self.a,
            k1=self.k2,
            k2=self.k1,
            t=self.t,
            mode=self.mode,
            prec=self.prec,
            core=self.core,
            w1=self.w2,
            w2=self.w1,
        )


# ---------------------------------------------------------------------------
# closed-form Laguerre moments


def _exponent(params: ModelParams, j: int, k: int):
    return 1 + params.a + params.b + params.theta1 * (j - 1) + params.theta2 * (k - 1)


def laguerre_moment(j: int, k: int, params: ModelParams):
    """Closed-form bi-moment at t = 0 for the Laguerre family.

    Exact mode at integer a, b and t1 = t2 = 1 returns
    (a+j-1)! (b+k-1)! / (a+b+j+k-1); the rational core keeps only the
    1/(1+a+b+t1(j-1)+t2(k-1)) factor.
    """
    if params.weight != "laguerre":
        raise ModeError("laguerre_moment needs the Laguerre family")
    if j < 1 or k < 1:
        raise RangeError("moment indices are 1-based")
    e = _exponent(params, j, k)
    if params.mode == "exact":
        if params.core:
            return Fraction(1) / e
        return Fraction(
            math.factorial(params.a.numerator + j - 1)
            * math.factorial(params.b.numerator + k - 1)
        ) / e
    ctx = params.context()
    num = ctx.gamma(1 + ctx.scalar(params.a) + ctx.scalar(params.theta1) * (j - 1))
    num *= ctx.gamma(1 + ctx.scalar(params.b) + ctx.scalar(params.theta2) * (k - 1))
    return num / ctx.scalar(e)


def time_scaled_moment(j: int, k: int, s, params: ModelParams):
    """Bi-moment with decay scale s: value = s^(-e) * I_{j,k}(0).

    The time-dependent table is this scaling at s = 1 - t.
    """
    base = laguerre_moment(j, k, params)
    e = _exponent(params, j, k)
    if params.mode == "exact":
        s = Fraction(s)
        if s <= 0:
            raise DomainError("scaling parameter must be positive")
        if params.core:
            # scaling is prefactor-homogeneous; the core is scale-free
            return base
        return base * s ** (-e.numerator if e.denominator == 1 else e)
    ctx = params.context()
    s = ctx.scalar(s)
    if s <= 0:
        raise DomainError("scaling parameter must be positive")
    return base * ctx.power(s, -ctx.scalar(e))


def single_moment(side: str, l: int, params: ModelParams):
    """Single moment of x^(theta*l) against one measure at time t.

    Laguerre closed form: Gamma(1+a+theta1*l) / (1-t)^(1+a+theta1*l) on the
    x side, mirrored on the y side.
    """
    if side not in ("x", "y"):
        raise ConfigError("side must be 'x' or 'y'")
    if l < 0:
        raise RangeError("single-moment index must be >= 0")
    if params.weight == "custom":
        return _quad_single(side, l, params)
    aa = params.a if side == "x" else params.b
    theta = params.theta1 if side == "x" else params.theta2
    e = 1 + aa + theta * l
    if params.mode == "exact":
        if params.core:
            raise ModeError("the rational core carries no single moments")
        one_minus_t = 1 - params.t
        return Fraction(math.factorial(aa.numerator + l)) / one_minus_t ** e.numerator
    ctx = params.context()
    et = 1 + ctx.scalar(aa) + ctx.scalar(theta) * l
    return ctx.gamma(et) / ctx.power(1 - ctx.scalar(params.t), et)


# ---------------------------------------------------------------------------
# quadrature moments (independent of the Gamma closed forms)


def _weight_integrand(side: str, exponent, s, params: ModelParams, ctx):
    """Integrand x^exponent * w(x;t) * e^(-s x) for one measure."""
    mp = ctx.mp
    e = ctx.scalar(exponent)
    t = ctx.scalar(params.t)
    if params.weight == "laguerre":
        aa = ctx.scalar(params.a if side == "x" else params.b)

        def fn(x):
            return mp.power(x, e + aa) * mp.exp(-(s + 1 - t) * x)

    else:
        w = params.w1 if side == "x" else params.w2

        def fn(x):
            return mp.power(x, e) * w.fn(ctx, x) * mp.exp((t - s) * x)

    return fn


def _quad_single(side: str, l: int, params: ModelParams):
    ctx = params.context()
    theta = params.theta1 if side == "x" else params.theta2
    fn = _weight_integrand(side, Fraction(theta * l), ctx.zero(), params, ctx)
    return integrate_halfline(
        HalflineIntegrand(fn=lambda c, x: fn(x), name=f"single {side}^{theta * l}"),
        params.prec,
    )


def quad_moment(i_exp, j_exp, params: ModelParams):
    """Bi-moment by quadrature for exponent pair (i_exp, j_exp).

    The kernel is split as 1/(x+y) = integral_0^inf e^(-s(x+y)) ds, reducing
    the double integral to a 1-D outer integral of the product of two
    half-line factor integrals.  For the Laguerre family each factor obeys
    the scaling F(s) = K * (1-t+s)^(-(1+a+e)) with K a one-time quadrature
    constant, so only custom weights pay for nested quadrature.
    """
    if params.mode != "real":
        raise ModeError("quad_moment runs in real mode")
    ctx = params.context()
    mp = ctx.mp
    prec = params.prec
    i_exp = Fraction(i_exp) if not isinstance(i_exp, float) else i_exp
    j_exp = Fraction(j_exp) if not isinstance(j_exp, float) else j_exp

    if params.weight == "laguerre":
        kx = integrate_halfline(
            HalflineIntegrand(
                fn=lambda c, u: c.mp.power(u, c.scalar(params.a) + c.scalar(i_exp)) * c.mp.exp(-u),
                name="x factor",
            ),
            prec,
        )
        ky = integrate_halfline(
            HalflineIntegrand(
                fn=lambda c, u: c.mp.power(u, c.scalar(params.b) + c.scalar(j_exp)) * c.mp.exp(-u),
                name="y factor",
            ),
            prec,
        )
        px = ctx.scalar(1 + params.a) + ctx.scalar(i_exp)
        py = ctx.scalar(1 + params.b) + ctx.scalar(j_exp)
        base = 1 - ctx.scalar(params.t)

        def outer(c, s):
            return kx * ky * c.mp.power(base + s, -px) * c.mp.power(base + s, -py)

    else:

        def outer(c, s):
            fx = _weight_integrand("x", i_exp, s, params, c)
            fy = _weight_integrand("y", j_exp, s, params, c)
            vx = integrate_halfline(HalflineIntegrand(fn=lambda cc, x: fx(x)), max(20, prec // 2))
            vy = integrate_halfline(HalflineIntegrand(fn=lambda cc, y: fy(y)), max(20, prec // 2))
            return vx * vy

    return integrate_halfline(
        HalflineIntegrand(fn=outer, name=f"bi-moment ({i_exp},{j_exp})"), prec
    )


# ---------------------------------------------------------------------------
# the table


class MomentTable:
    """Immutable grid of bi-moments plus the two single-moment sequences.

    Indices are 1-based for bi-moments (matching I_{j,k}) and 0-based for
    single moments (theta-power index).  Derivative depth is fixed at build
    time; requests beyond the stored range raise instead of extending.
    """

    def __init__(self, params: ModelParams, n_max: int, deriv_depth: int,
                 bi, sx, sy, check_tau: bool = True):
        self.params = params
        self.n_max = n_max
        self.deriv_depth = deriv_depth
        self._bi = tuple(tuple(row) for row in bi)
        self._sx = tuple(sx) if sx is not None else None
        self._sy = tuple(sy) if sy is not None else None
        self.jmax = len(self._bi)
        self.kmax = len(self._bi[0]) if self._bi else 0
        self._tau_cache = {0: params.context().one()}
        self._poly_cache = {}
        if check_tau:
            for n in range(1, n_max + 1):
                tn = self.tau(n)
                if tn == 0 or (not params.core and tn < 0):
                    raise DegeneracyError(
                        f"tau_{n} = {tn} is not positive; moment matrix degenerate",
                        site=n,
                    )

    @property
    def ctx(self):
        return self.params.context()

    def bi(self, j: int, k: int):
        """Bi-moment I_{j,k}, 1-based."""
        if not (1 <= j <= self.jmax and 1 <= k <= self.kmax):
            raise RangeError(
                f"bi-moment ({j},{k}) outside table {self.jmax}x{self.kmax}"
            )
        return self._bi[j - 1][k - 1]

    def bi_dt(self, j: int, k: int, order: int = 1):
        """Exact order-th time derivative via the iterated shift rule."""
        if self.params.core:
            raise ModeError("core tables carry no time derivatives")
        if order < 0:
            raise RangeError("derivative order must be >= 0")
        if order > self.deriv_depth:
            raise RangeError(
                f"table built for derivative depth {self.deriv_depth}, got {order}"
            )
        total = self.ctx.zero()
        for i in range(order + 1):
            total += math.comb(order, i) * self.bi(
                j + i * self.params.k1, k + (order - i) * self.params.k2
            )
        return total

    def single(self, side: str, l: int):
        seq = self._sx if side == "x" else self._sy
        if seq is None:
            raise ModeError("this table carries no single moments")
        if not (0 <= l < len(seq)):
            raise RangeError(f"single moment {side}[{l}] outside table")
        return seq[l]

    def single_dt(self, side: str, l: int, order: int = 1):
        if order > self.deriv_depth:
            raise RangeError(
                f"table built for derivative depth {self.deriv_depth}, got {order}"
            )
        k = self.params.k1 if side == "x" else self.params.k2
        return self.single(side, l + order * k)

    def tau(self, n: int):
        """Leading n x n moment determinant."""
        if n not in self._tau_cache:
            m = DenseMatrix(
                [[self.bi(j, k) for k in range(1, n + 1)] for j in range(1, n + 1)],
                self.ctx,
            )
            self._tau_cache[n] = det(m)
        return self._tau_cache[n]

    # -- prefactor descriptors of the rational core ------------------------

    def row_gamma_arg(self, j: int) -> Fraction:
        """Argument of the Gamma prefactor carried by row j (1-based)."""
        return 1 + Fraction(self.params.a) + self.params.theta1 * (j - 1)

    def col_gamma_arg(self, k: int) -> Fraction:
        return 1 + Fraction(self.params.b) + self.params.theta2 * (k - 1)

    # -- fault injection ----------------------------------------------------

    def with_perturbed_entry(self, j: int, k: int, delta) -> "MomentTable":
        """Copy with one bi-moment offset; used to prove checks can fail."""
        bi = [list(row) for row in self._bi]
        bi[j - 1][k - 1] = bi[j - 1][k - 1] + self.ctx.scalar(delta)
        return MomentTable(
            self.params, self.n_max, self.deriv_depth, bi, self._sx, self._sy,
            check_tau=False,
        )


def table_margins(n_max: int, deriv_depth: int, params: ModelParams):
    """Index ranges a table needs to serve polynomials to degree n_max + 1,
    one x- or y-multiplication, and deriv_depth shift-rule derivatives."""
    jmax = n_max + params.k1 + 2 + deriv_depth * params.k1
    kmax = n_max + params.k2 + 2 + deriv_depth * params.k2
    lx = n_max + params.k1 + 2 + deriv_depth * params.k1
    ly = n_max + params.k2 + 2 + deriv_depth * params.k2
    return jmax, kmax, lx, ly


def build_table(params: ModelParams, n_max: int, deriv_depth: int = 0) -> MomentTable:
    """Populate a moment table and verify tau_n != 0 for n <= n_max."""
    jmax, kmax, lx, ly = table_margins(n_max, deriv_depth, params)
    if params.weight == "laguerre":
        s = 1 - params.t
        bi = [
            [time_scaled_moment(j, k, s, params) for k in range(1, kmax + 1)]
            for j in range(1, jmax + 1)
        ]
    else:
        t1, t2 = params.theta1, params.theta2
        bi = [
            [quad_moment(t1 * (j - 1), t2 * (k - 1), params) for k in range(1, kmax + 1)]
            for j in range(1, jmax + 1)
        ]
    if params.core:
        sx = sy = None
    else:
        sx = [single_moment("x", l, params) for l in range(lx + 1)]
        sy = [single_moment("y", l, params) for l in range(ly + 1)]
    return MomentTable(params, n_max, deriv_depth, bi, sx, sy)


def moment_t_derivative(table: MomentTable, j: int, k: int, order: int):
    """Module-level alias for the table's exact shift-rule derivative."""
    if order == 0:
        return table.bi(j, k)
    return table.bi_dt(j, k, order)


# ---------------------------------------------------------------------------
# oriented views (primal / dual) and jet lifting


class TableView:
    """Orientation-aware, optionally derivative-carrying window onto a table.

    ``swap=True`` exchanges the two sides (rows <-> columns, x <-> y), which
    turns every primal construction into its dual.  ``jet=True`` lifts each
    entry to a Jet seeded with its exact shift-rule t-derivative.
    """

    def __init__(self, table: MomentTable, swap: bool = False, jet: bool = False):
        self.table = table
        self.swap = swap
        self.jet = jet

    @property
    def params(self) -> ModelParams:
        return self.table.params

    @property
    def ctx(self):
        return self.table.ctx

    @property
    def k_row(self) -> int:
        return self.table.params.k2 if self.swap else self.table.params.k1

    @property
    def k_col(self) -> int:
        return self.table.params.k1 if self.swap else self.table.params.k2

    @property
    def theta_row(self) -> Fraction:
        return self.table.params.theta2 if self.swap else self.table.params.theta1

    def _wrap_bi(self, j, k):
        if self.jet:
            return Jet(self.table.bi(j, k), self.table.bi_dt(j, k))
        return self.table.bi(j, k)

    def mom(self, i: int, jj: int):
        """Bi-moment for 0-based theta-power exponents (row i, column jj)."""
        if self.swap:
            return self._wrap_bi(jj + 1, i + 1)
        return self._wrap_bi(i + 1, jj + 1)

    def single_row(self, l: int):
        """Single moment of the row-side measure at theta-power l."""
        side = "y" if self.swap else "x"
        if self.jet:
            return Jet(self.table.single(side, l), self.table.single_dt(side, l))
        return self.table.single(side, l)

    def dual(self) -> "TableView":
        return TableView(self.table, swap=not self.swap, jet=self.jet)

    def cache_key(self, *extra):
        return (self.swap, self.jet) + extra
