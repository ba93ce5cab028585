import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from veech import words
from veech.cocycle import (CocycleMap, DeterminantError, PairedPoint, birkhoff_average,
                           constant_cocycle, exponent_scan, fekete_violations, finite_lyap,
                           identity_cocycle, log_norm_trace, mat_to_row, op_norm, product,
                           psi_observable, psi_value, sl2_square_cocycle,
                           sup_and_mean_norm_growth, walters_B, walters_log_norm_oracle,
                           window_abs_theta)
from veech.subshift import explicit_window, inside_elementary

L5, L6 = words.length_of(5), words.length_of(6)
B = walters_B(1.0)
matrices = st.lists(st.floats(-5, 5, allow_nan=False), min_size=4, max_size=4).map(
    lambda v: np.array(v).reshape(2, 2))


def power_iteration_norm(M, squarings=60):
    """Power iteration on M^T M, accelerated by repeated squaring."""
    G = M.T @ M
    P = G.copy()
    for _ in range(squarings):
        P = P @ P
        s = np.abs(P).max()
        if s == 0:
            return 0.0
        P /= s
    v = P @ np.array([1.0, 0.37])
    if np.linalg.norm(v) == 0:
        v = P @ np.array([0.37, 1.0])
    v /= np.linalg.norm(v)
    return math.sqrt(float(v @ G @ v))


def test_op_norm_examples():
    assert op_norm(np.eye(2)) == 1.0
    assert op_norm(np.diag([math.e, 1 / math.e])) == pytest.approx(math.e, rel=1e-15)


@settings(max_examples=300, deadline=None)
@given(matrices)
def test_op_norm_vs_power_iteration(M):
    ref = np.linalg.svd(M, compute_uv=False)[0]
    assert abs(op_norm(M) - ref) <= 1e-10 * max(1.0, ref)
    if ref > 1e-3:
        s = np.linalg.svd(M, compute_uv=False)
        if s[0] - s[1] > 1e-3 * s[0]:
            assert abs(op_norm(M) - power_iteration_norm(M)) <= 1e-10 * ref


@settings(max_examples=200, deadline=None)
@given(matrices, matrices)
def test_norm_submultiplicative(M, N):
    assert op_norm(M @ N) <= op_norm(M) * op_norm(N) * (1 + 1e-12) + 1e-300


def test_walters_values():
    z = explicit_window("ZUD", 0)
    Bz = B(z)
    assert np.array_equal(Bz, np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.linalg.det(Bz) == -1.0
    u = explicit_window("UDZ", 0)
    assert np.allclose(B(u), [[0, math.e], [1 / math.e, 0]], rtol=1e-15)
    assert walters_B(0.5)(u)[0, 1] == pytest.approx(math.exp(0.5))
    with pytest.raises(ValueError):
        walters_B(0.0)


def test_walters_square_is_diagonal():
    # top-left entry is e^{-psi}: B(Ty)B(y) = diag(e^{phi(Ty)-phi(y)}, e^{phi(y)-phi(Ty)})
    rng = np.random.default_rng(0)
    for pos in rng.integers(0, L6 - 2, 50):
        y = inside_elementary(6, int(pos))
        B2 = product(B, y, 2).full()
        psi = psi_value(y)
        assert np.allclose(B2, np.diag([math.exp(-psi), math.exp(psi)]), rtol=1e-12, atol=0)


def test_product_small_cases():
    y = inside_elementary(6, 0)
    p1 = product(B, y, 1)
    assert np.allclose(p1.full(), B(y))
    assert p1.log_scale == pytest.approx(1.0)
    p0 = product(B, y, 0)
    assert np.array_equal(p0.matrix, np.eye(2)) and p0.log_scale == 0.0
    assert finite_lyap(B, y, 2) == pytest.approx(1.0)


def test_scaled_product_unit_norm():
    y = inside_elementary(7, 1234)
    for n in (3, 100, 5000):
        p = product(B, y, n)
        assert op_norm(p.matrix) == pytest.approx(1.0, rel=1e-12)


def _random_sl2_cocycle():
    def batch(x, n):
        s = x.block(0, n + 1).astype(float)
        t = 0.3 * s[:-1] + 0.2 * s[1:]
        out = np.empty((n, 2, 2))
        out[:, 0, 0] = np.cosh(t) + 0.5
        out[:, 0, 1] = np.sinh(t)
        out[:, 1, 0] = np.sinh(t) + 0.1
        # fix the determinant to 1
        out[:, 1, 1] = (1 + out[:, 0, 1] * out[:, 1, 0]) / out[:, 0, 0]
        return out

    return CocycleMap(lambda x: batch(x, 1)[0], 1, batch, "mixed")


@pytest.mark.parametrize("A", [B, _random_sl2_cocycle()], ids=["walters", "mixed"])
def test_cocycle_law(A):
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = inside_elementary(7, int(rng.integers(20000, 10 ** 8)))
        m, n = (int(v) for v in rng.integers(1, 5000, 2))
        whole = product(A, x, m + n)
        first = product(A, x, n)
        second = product(A, x.shift(n), m)
        comb = second.matrix @ first.matrix
        lc = second.log_scale + first.log_scale + math.log(op_norm(comb))
        assert abs(lc - whole.log_scale) <= 1e-9 * max(1.0, abs(whole.log_scale))
        if whole.log_scale - (second.log_scale + first.log_scale) > -20:
            err = np.abs(comb / op_norm(comb) - whole.matrix).max()
            assert err <= 1e-9


def test_inverse_products():
    A = _random_sl2_cocycle()
    x = inside_elementary(7, 10 ** 6)
    for n in (1, 10, 300):
        fwd = product(A, x.shift(-n), n)
        inv = product(A, x, -n)
        if n <= 10:
            assert np.allclose(inv.full() @ fwd.full(), np.eye(2), atol=1e-8)
        # det = 1, so ||M^{-1}|| = ||M|| and the normalized inverse is the adjugate
        F = fwd.matrix
        assert inv.log_scale == pytest.approx(fwd.log_scale, rel=1e-12)
        assert np.allclose(inv.matrix, [[F[1, 1], -F[0, 1]], [-F[1, 0], F[0, 0]]], atol=1e-12)
    assert np.allclose(product(B, x.shift(10), -10).full() @ product(B, x, 10).full(),
                       np.eye(2), atol=1e-9)


def test_determinant_under_renormalization():
    A = _random_sl2_cocycle()
    x = inside_elementary(7, 5 * 10 ** 6)
    checked = 0
    for n in (2, 5, 10, 20, 1000, 10 ** 4):
        p = product(A, x, n)
        # the normalized determinant is e^{-2 log_scale}; readable only while not tiny
        if p.log_scale < 6:
            det = np.linalg.det(p.matrix) * math.exp(2 * p.log_scale)
            assert abs(abs(det) - 1) <= 1e-8
            checked += 1
        ps = product(A, x.shift(n), -n)
        assert ps.log_scale == pytest.approx(p.log_scale, rel=1e-9)
    assert checked >= 2


def test_walters_oracle_identity_even_and_odd():
    x = inside_elementary(7, 777)
    logs = log_norm_trace(B, x, 20000)
    exact = walters_log_norm_oracle(x.block(0, 20000))
    n = np.arange(1, 20001)
    assert np.all(np.abs(logs - exact[1:]) <= 1e-8 * n)
    for n in (2, 3, 14, 142, 1001, 2558):
        assert product(B, x, n).log_scale == pytest.approx(float(exact[n]), abs=1e-9 * n)


def test_walters_exponent_on_e6():
    lyap = finite_lyap(B, inside_elementary(7, 0), L6)
    assert abs(lyap - 624960 / 5740286) <= 1e-8


def test_window_abs_theta():
    e4 = words.build_elementary(4)
    signs = words.to_signs(e4)
    vals = window_abs_theta(signs, 10)
    for i in range(0, len(e4) - 10, 37):
        assert vals[i] == abs(words.theta(e4[i:i + 10]))


def test_psi_examples():
    assert psi_value(explicit_window("UD", 0)) == 2.0
    psi = psi_observable()
    n = L6 // 2
    even = birkhoff_average(psi, inside_elementary(7, 0), n, step=2)
    assert abs(even - 2 * 624960 / 5740286) <= 1e-9
    odd = birkhoff_average(psi, inside_elementary(7, 1), n, step=2)
    oracle = Fraction(words.theta(inside_elementary(7, 1).word(0, 2 * n)), n)
    assert abs(odd - float(oracle)) <= 1e-9 and odd < 0


def test_identity_and_diagonal_scans():
    x = inside_elementary(6, 50)
    assert finite_lyap(identity_cocycle(), x, 123) == 0.0
    scan = exponent_scan(identity_cocycle(), x, 100, "all")
    assert np.all(scan.exponents == 0)
    lam = 0.3
    D = constant_cocycle(np.diag([math.exp(lam), math.exp(-lam)]))
    assert np.allclose(exponent_scan(D, x, 200).exponents, lam, atol=1e-13)


def test_junction_scan():
    x = inside_elementary(7, L6 - L5)
    scan = exponent_scan(B, x, L6, "even", oracle=True)
    assert scan.at(2 * L5) == 0.0
    assert scan.min()[1] == 0.0
    c = 624960 / 5740286
    late = scan.exponents[scan.ns >= 2 * L5]
    assert late.max() >= 0.7 * c
    # the float route agrees with the integer route
    float_scan = exponent_scan(B, x, 2 * L5 + 1000, "even")
    assert abs(float_scan.at(2 * L5)) <= 1e-12


def test_scan_oracle_requires_walters():
    with pytest.raises(ValueError):
        exponent_scan(identity_cocycle(), inside_elementary(6, 0), 10, oracle=True)


def test_sup_and_mean_growth():
    g = sup_and_mean_norm_growth(B, 5, L5)
    c = 624960 / 5740286
    assert c <= g.sup <= c + 0.05
    assert g.mean <= g.sup
    sups = {n: sup_and_mean_norm_growth(B, 4, n).sup * n for n in (2, 4, 6, 8, 12, 16, 24, 32)}
    assert fekete_violations(sups, 1e-9) == []
    # exact and matrix routes agree on a stride sample
    g_exact = sup_and_mean_norm_growth(B, 3, 20, stride=5)
    g_float = sup_and_mean_norm_growth(B, 3, 20, stride=5, oracle=False)
    assert np.allclose(g_exact.per_point, g_float.per_point, atol=1e-12)


def test_square_cocycle():
    A = sl2_square_cocycle(B)
    rng = np.random.default_rng(5)
    for pos in rng.integers(0, L6 - 5000, 20):
        z = PairedPoint(inside_elementary(6, int(pos)))
        assert np.linalg.det(A(z)) == pytest.approx(1.0, abs=1e-9)
        assert np.allclose(A(z), product(B, z.base, 2).full())
        assert finite_lyap(A, z, 71) == pytest.approx(2 * finite_lyap(B, z.base, 142), abs=1e-12)
        assert z.shift(3).coord(0) == z.coord(3)
    ident = sl2_square_cocycle(identity_cocycle())
    assert np.array_equal(ident(PairedPoint(inside_elementary(6, 0))), np.eye(2))
    bad = constant_cocycle(np.diag([2.0, 1.0]))
    with pytest.raises(DeterminantError):
        sl2_square_cocycle(bad)(PairedPoint(inside_elementary(6, 0)))


def test_matrix_row_format():
    assert mat_to_row(np.array([[0.1, 1], [2, 3]])) == ["0.10000000000000001", "1", "2", "3"]
