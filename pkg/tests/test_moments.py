"""Tests for moment closed forms, scaling, shift-rule derivatives, tables."""

from fractions import Fraction as F

import mpmath
import pytest

from cauchylattice.errors import (
    ConfigError,
    DegeneracyError,
    DomainError,
    ModeError,
    RangeError,
)
from cauchylattice.moments import (
    CustomWeight,
    ModelParams,
    MomentTable,
    build_table,
    laguerre_moment,
    moment_t_derivative,
    quad_moment,
    single_moment,
    time_scaled_moment,
)

EXACT00 = ModelParams(a=0, b=0, mode="exact")
EXACT01 = ModelParams(a=0, b=1, mode="exact")


# ------------------------------------------------------------------ params


def test_params_validation():
    with pytest.raises(ConfigError):
        ModelParams(k1=0)
    with pytest.raises(DomainError):
        ModelParams(t=1, mode="exact")
    with pytest.raises(ModeError):
        ModelParams(a=F(1, 2), mode="exact")  # exact without core needs integers
    with pytest.raises(ModeError):
        ModelParams(k1=2, a=0, b=0, mode="exact")
    # but the rational core accepts any rational parameters
    p = ModelParams(a=F(1, 2), b=F(1, 3), k1=2, k2=3, mode="exact", core=True)
    assert p.theta1 == F(1, 2) and p.theta2 == F(1, 3)
    sw = p.swapped()
    assert (sw.a, sw.k1) == (F(1, 3), 3)


# ------------------------------------------------------------ closed forms


def test_laguerre_moment_examples():
    assert laguerre_moment(1, 1, EXACT00) == 1
    assert laguerre_moment(2, 1, EXACT00) == F(1, 2)
    assert laguerre_moment(2, 2, EXACT00) == F(1, 3)


def test_laguerre_moment_real_matches_exact():
    pr = ModelParams(a=0, b=1, mode="real", prec=40)
    for j, k in [(1, 1), (3, 2), (2, 4)]:
        assert abs(pr.context().to_float(laguerre_moment(j, k, pr))
                   - float(laguerre_moment(j, k, EXACT01))) < 1e-30


def test_time_scaled_moment():
    assert time_scaled_moment(1, 1, 1, EXACT00) == laguerre_moment(1, 1, EXACT00)
    assert time_scaled_moment(1, 1, 2, EXACT00) == F(1, 2)
    # exponent 1+a+b+ (j-1) + (k-1) = 3 here, so (1/2)^(-3) * 1/3
    p = ModelParams(a=0, b=1, mode="exact")
    assert time_scaled_moment(2, 1, F(1, 2), p) == 8 * laguerre_moment(2, 1, p)
    with pytest.raises(DomainError):
        time_scaled_moment(1, 1, 0, EXACT00)


def test_time_scaling_invariance():
    # s^exponent * J(s) is independent of s (exactly, in exact mode)
    p = ModelParams(a=1, b=0, mode="exact")
    for j, k in [(1, 1), (2, 3)]:
        e = 1 + p.a + p.b + (j - 1) + (k - 1)
        vals = {
            time_scaled_moment(j, k, s, p) * F(s) ** e.numerator
            for s in (F(1), F(1, 3), F(7, 2))
        }
        assert len(vals) == 1


# ---------------------------------------------------------- single moments


def test_single_moment_examples():
    assert single_moment("x", 0, EXACT00) == 1
    assert single_moment("x", 2, EXACT00) == 2  # Gamma(3)
    p = ModelParams(a=1, b=0, t=F(1, 2), mode="exact")
    assert single_moment("x", 0, p) == 4  # Gamma(2) / (1/2)^2


def test_single_moment_shift_rule():
    # d/dt phi_l = phi_(l+k) checked against the closed form at two times
    p0 = ModelParams(a=1, b=0, t=F(1, 5), mode="exact")
    h = F(1, 10**8)
    pp = ModelParams(a=1, b=0, t=F(1, 5) + h, mode="exact")
    pm = ModelParams(a=1, b=0, t=F(1, 5) - h, mode="exact")
    fd = (single_moment("x", 1, pp) - single_moment("x", 1, pm)) / (2 * h)
    assert abs(float(fd - single_moment("x", 2, p0))) < 1e-6


# ------------------------------------------------------- quadrature moments


@pytest.mark.parametrize("k1,k2", [(1, 1), (2, 1), (2, 3)])
def test_quad_moment_agrees_with_closed_form(k1, k2):
    p = ModelParams(a=0, b=0, k1=k1, k2=k2, mode="real", prec=25)
    ctx = p.context()
    for j in range(1, 5):
        for k in range(1, 5):
            q = quad_moment(p.theta1 * (j - 1), p.theta2 * (k - 1), p)
            c = laguerre_moment(j, k, p)
            assert abs(ctx.to_float(q - ctx.scalar(c))) < 1e-10, (j, k)


def test_quad_moment_symmetry_with_custom_weights():
    w = CustomWeight(fn=lambda ctx, x: ctx.mp.exp(-x) * (1 + x), name="shifted")
    p = ModelParams(weight="custom", mode="real", prec=20, w1=w, w2=w)
    v01 = quad_moment(0, 1, p)
    v10 = quad_moment(1, 0, p)
    assert abs(float(v01 - v10)) < 1e-12


# ------------------------------------------------------------------ tables


def test_build_table_example_values():
    table = build_table(EXACT00, n_max=2)
    assert table.bi(1, 1) == 1
    assert table.bi(1, 2) == F(1, 2)
    assert table.bi(2, 2) == F(1, 3)
    assert table.tau(2) == F(1, 12)
    assert table.tau(0) == 1


def test_table_rejects_out_of_range():
    table = build_table(EXACT00, n_max=1)
    with pytest.raises(RangeError):
        table.bi(100, 1)
    with pytest.raises(RangeError):
        table.bi_dt(1, 1)  # deriv_depth = 0
    with pytest.raises(RangeError):
        table.single("x", 10**6)


def test_moment_t_derivative_examples():
    table = build_table(EXACT00, n_max=1, deriv_depth=2)
    assert moment_t_derivative(table, 1, 1, 0) == 1
    assert moment_t_derivative(table, 1, 1, 1) == 1  # 1/2 + 1/2
    assert moment_t_derivative(table, 1, 1, 2) == 2  # 2/3 + 2*2/3? no: 2/3+2/3+2/3


def test_shift_rule_consistency():
    # I_{j+1,k} + I_{j,k+1} = (1+a+b+(j-1)+(k-1)) I_{j,k}, exactly
    p = ModelParams(a=2, b=1, mode="exact")
    table = build_table(p, n_max=3, deriv_depth=1)
    for j in range(1, 5):
        for k in range(1, 5):
            lhs = table.bi(j + 1, k) + table.bi(j, k + 1)
            assert lhs == (1 + p.a + p.b + (j - 1) + (k - 1)) * table.bi(j, k)


def test_rank_one_derivative_structure():
    # with the Cauchy kernel, d/dt I_{j,k} equals the product of singles
    p = ModelParams(a=0, b=1, t=F(1, 3), mode="exact")
    table = build_table(p, n_max=3, deriv_depth=1)
    for j in range(1, 4):
        for k in range(1, 4):
            assert table.bi_dt(j, k) == table.single("x", j - 1) * table.single("y", k - 1)


def test_positivity_and_symmetry():
    p = ModelParams(a=1, b=1, k1=2, k2=2, mode="real", prec=30)
    table = build_table(p, n_max=3)
    for j in range(1, table.jmax + 1):
        for k in range(1, table.kmax + 1):
            assert table.bi(j, k) > 0
            if k <= table.jmax and j <= table.kmax:
                assert abs(float(table.bi(j, k) - table.bi(k, j))) < 1e-25


def test_degenerate_table_aborts_with_site():
    p = ModelParams(a=0, b=0, mode="exact")
    good = build_table(p, n_max=2)
    bad_bi = [[good.bi(j, k) for k in range(1, good.kmax + 1)] for j in range(1, good.jmax + 1)]
    bad_bi[1][0] = bad_bi[0][0] * bad_bi[0][1] / bad_bi[0][0]  # make rows 1,2 proportional
    bad_bi[1][1] = bad_bi[0][1] ** 2 / bad_bi[0][0]
    for k in range(2, good.kmax):
        bad_bi[1][k] = bad_bi[0][k] * bad_bi[0][1] / bad_bi[0][0]
    with pytest.raises(DegeneracyError) as err:
        MomentTable(p, 2, 0, bad_bi, good._sx, good._sy)
    assert err.value.site == 2


def test_fault_injection_copy():
    table = build_table(EXACT00, n_max=2)
    bad = table.with_perturbed_entry(1, 1, F(1, 1000))
    assert bad.bi(1, 1) == table.bi(1, 1) + F(1, 1000)
    assert table.bi(1, 1) == 1  # original untouched
