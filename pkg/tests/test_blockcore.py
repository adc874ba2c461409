import numpy as np
import pytest

from bjweyl.blockcore import (
    BlockVecSeq,
    JacobiParams,
    ParamsError,
    apply_formal,
    cyclic_block_product,
    delta_seq,
    make_family,
    matrix_functionals,
    validate_params,
)
from conftest import random_bounded_params


def test_free_family_blocks():
    p = make_family("free", 1)
    assert p.A(0) == np.eye(1)
    assert p.B(7) == np.zeros((1, 1))
    assert p.bounded


def test_constant_family_rejects_singular_A():
    with pytest.raises(ParamsError, match="singular A"):
        make_family("constant", 2, A=np.zeros((2, 2)), B=np.eye(2))


def test_constant_family_rejects_non_hermitian_B():
    b = np.array([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ParamsError, match="non-Hermitian B"):
        make_family("constant", 2, A=np.eye(2), B=b)


def test_diagonal_family_assembles_scalar_parts():
    p = make_family("diagonal", 2,
                    components=[{"a": 1.0, "b": 0.0}, {"a": 2.0, "b": 0.5}])
    np.testing.assert_allclose(p.A(3), np.diag([1.0, 2.0]))
    np.testing.assert_allclose(p.B(3), np.diag([0.0, 0.5]))


def test_periodic_modulated_growth():
    p = make_family("periodic_modulated", 1,
                    A_period=[[[1.0]]], B_period=[[[0.0]]], growth=0.5)
    np.testing.assert_allclose(p.A(3), [[2.0]])
    assert not p.bounded


def test_explicit_family_is_finite():
    p = make_family("explicit", 1, A=[[[1.0]]], B=[[[0.0]]])
    p.blocks(0)
    with pytest.raises(IndexError):
        p.blocks(1)


def test_validate_params_flags_bad_blocks():
    def rule(n):
        if n == 2:
            return np.zeros((1, 1)), np.zeros((1, 1))
        return np.eye(1), np.eye(1) * 1j  # B not Hermitian
    p = JacobiParams(1, rule)
    out = validate_params(p, 3)
    assert not out["ok"]
    kinds = {(v["n"], v["kind"]) for v in out["violations"]}
    assert (2, "singular_A") in kinds
    assert (0, "non_hermitian_B") in kinds


def test_validate_params_ok_random(rng):
    p = random_bounded_params(rng, 3)
    assert validate_params(p, 20)["ok"]


def test_matrix_functionals(rng):
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    f = matrix_functionals(a)
    sv = np.linalg.svd(a, compute_uv=False)
    assert f["minmod"] == pytest.approx(sv[-1])
    assert f["hs"] == pytest.approx(np.sqrt((np.abs(a) ** 2).sum()))
    np.testing.assert_allclose(f["re"] + 1j * f["im"], a, atol=1e-14)
    # minmod is the reciprocal of the inverse norm for invertible input
    assert f["minmod"] == pytest.approx(1.0 / np.linalg.norm(np.linalg.inv(a), 2))


def test_sequence_zero_padding():
    s = delta_seq(2, [1.0, 0.0], d=2)
    assert np.all(s.term(5) == 0)
    with pytest.raises(IndexError):
        s.term(-1)


def test_sequence_rejects_nonfinite():
    with pytest.raises(ValueError):
        BlockVecSeq(np.array([[np.nan]]), start=0)


def test_apply_formal_free_shift():
    # free operator acts as the two-sided shift restricted to n >= 0
    p = make_family("free", 1)
    u = delta_seq(3, [1.0], d=1)
    ju = apply_formal(p, u, 5)
    np.testing.assert_allclose(ju.terms[:, 0], [0, 0, 1, 0, 1, 0])


def test_cyclic_block_product(rng):
    p = random_bounded_params(rng, 2)
    assert np.array_equal(cyclic_block_product(p, 0), np.eye(2))
    expect = (p.A(0) @ p.A(1) @ p.A(2)).conj().T
    np.testing.assert_allclose(cyclic_block_product(p, 3), expect, atol=1e-13)


def test_lu_solve_matches_direct(rng):
    p = random_bounded_params(rng, 3)
    rhs = rng.standard_normal((3, 3))
    np.testing.assert_allclose(p.solve_A(4, rhs),
                               np.linalg.solve(p.A(4), rhs), atol=1e-12)
