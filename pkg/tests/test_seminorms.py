import math

import numpy as np
import pytest

from bjweyl.blockcore import BlockMatSeq, BlockVecSeq
from bjweyl.seminorms import SeminormKind, affine_interp, quotient_brackets, seminorm


def vec_seq(rng, n, d, start=0):
    return BlockVecSeq(rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d)),
                       start=start)


def mat_seq(rng, n, d):
    return BlockMatSeq(rng.standard_normal((n, d, d))
                       + 1j * rng.standard_normal((n, d, d)))


def test_affine_interp_hits_nodes():
    f = [1.0, 4.0, 9.0]
    assert affine_interp(f, 1.0) == 4.0
    assert affine_interp(f, 1.5) == 6.5
    with pytest.raises(ValueError):
        affine_interp(f, 2.5)


def test_vector_seminorm_matches_direct_sum(rng):
    x = vec_seq(rng, 8, 3)
    direct = math.sqrt(sum(np.vdot(x.term(k), x.term(k)).real for k in range(5)))
    assert seminorm(x, SeminormKind.vector_norm, 0, 4) == pytest.approx(direct)


def test_squared_seminorm_affine_on_segment(rng):
    x = vec_seq(rng, 8, 2)
    a = seminorm(x, SeminormKind.vector_norm, 0, 3) ** 2
    b = seminorm(x, SeminormKind.vector_norm, 0, 4) ** 2
    mid = seminorm(x, SeminormKind.vector_norm, 0, 3.25) ** 2
    assert mid == pytest.approx(a + 0.25 * (b - a))


def test_matrix_variants_order(rng):
    # minmod of each term is at most its operator norm
    x = mat_seq(rng, 6, 3)
    lo = seminorm(x, SeminormKind.matrix_minmod, 0, 5)
    hi = seminorm(x, SeminormKind.matrix_norm, 0, 5)
    assert lo <= hi + 1e-14


def test_matrix_kind_rejects_vector_input(rng):
    x = vec_seq(rng, 4, 2)
    with pytest.raises(ValueError):
        seminorm(x, SeminormKind.matrix_norm, 0, 2)


def test_infinite_upper_limit_sums_tail(rng):
    x = vec_seq(rng, 5, 2)
    assert seminorm(x, SeminormKind.vector_norm, 0, math.inf) == pytest.approx(
        seminorm(x, SeminormKind.vector_norm, 0, 4))


def test_quotient_brackets_contain_value(rng):
    for _ in range(20):
        x = vec_seq(rng, 10, 2)
        y = vec_seq(rng, 10, 2)
        t = rng.uniform(1.0, 8.0)
        out = quotient_brackets(x, y, SeminormKind.vector_norm, 0, t)
        assert out["lower"] - 1e-12 <= out["value"] <= out["upper"] + 1e-12


def test_quotient_monotone_within_segment(rng):
    # the bracketing rests on per-segment monotonicity of the ratio
    x = vec_seq(rng, 6, 2)
    y = vec_seq(rng, 6, 2)
    vals = [quotient_brackets(x, y, SeminormKind.vector_norm, 0, 2.0 + s)["value"]
            for s in (0.1, 0.4, 0.7, 0.9)]
    diffs = np.diff(vals)
    assert np.all(diffs >= -1e-12) or np.all(diffs <= 1e-12)


def test_start_minus_one_sequences(rng):
    x = vec_seq(rng, 6, 2, start=-1)
    val = seminorm(x, SeminormKind.vector_norm, 0, 3)
    direct = math.sqrt(sum(np.vdot(x.term(k), x.term(k)).real for k in range(4)))
    assert val == pytest.approx(direct)
    with pytest.raises(ValueError):
        seminorm(x, SeminormKind.vector_norm, -2, 3)
