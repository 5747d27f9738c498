import numpy as np
import pytest

from factorgd.sensing import (
    MeasurementOperator,
    adjoint,
    apply,
    estimate_rip_delta,
    make_gaussian_operator,
    make_identity_operator,
)

# Frozen: A_1 of make_gaussian_operator(2, 2, 1, seed=7), row-major.
GOLDEN_OP_2x2_M1_SEED7 = [1.1674961266838846, -0.15796467135286796, -0.04132313598945355, -0.46990686673321813]


def rand(shape, seed):
    return np.random.default_rng(seed).standard_normal(shape)


@pytest.fixture(scope="module")
def op700():
    return make_gaussian_operator(50, 50, 700, 1000)


def test_gaussian_variance(op700):
    assert op700.m == 700 and op700.matrix(0).shape == (50, 50)
    var = np.var(np.stack([op700.matrix(i) for i in range(700)]))
    assert abs(var - 1 / 700) <= 0.1 / 700


def test_gaussian_golden():
    op = make_gaussian_operator(2, 2, 1, 7)
    assert op.matrix(0).ravel().tolist() == GOLDEN_OP_2x2_M1_SEED7


def test_gaussian_deterministic():
    a = make_gaussian_operator(3, 4, 5, 11)
    b = make_gaussian_operator(3, 4, 5, 11)
    assert all(np.array_equal(a.matrix(i), b.matrix(i)) for i in range(5))


def test_gaussian_rejects_bad_sizes():
    with pytest.raises(ValueError):
        make_gaussian_operator(2, 2, 0, 1)


def test_identity_roundtrip():
    op = make_identity_operator(4, 3)
    M = rand((4, 3), 1)
    assert np.array_equal(op.adjoint(op.apply(M)), M)
    assert np.array_equal(apply(op, M), M.ravel())
    assert op.is_identity and op.m == 12 and op.kind == "identity"


def test_identity_loss_matches_frobenius():
    from factorgd.problem import make_ground_truth, make_measurements

    truth = make_ground_truth(5, 2, [1.0, 0.5])
    inst = make_measurements(truth, make_identity_operator(5, 5), 3, "asymmetric")
    F, G = rand((5, 3), 2), rand((5, 3), 3)
    assert abs(inst.train_loss(F, G) - 0.5 * np.sum((F @ G.T - truth.Sigma) ** 2)) <= 1e-12


def test_single_basis_matrix():
    A = np.zeros((1, 3, 3))
    A[0, 0, 0] = 1.0
    op = MeasurementOperator(3, 3, A)
    M = rand((3, 3), 4)
    assert apply(op, M).tolist() == [M[0, 0]]
    assert np.array_equal(adjoint(op, np.array([1.0])), A[0])


def test_apply_naive_trace_oracle():
    op = make_gaussian_operator(4, 5, 9, 3)
    M = rand((4, 5), 5)
    y = op.apply(M)
    for i in range(op.m):
        Ai = op.matrix(i)
        tr = 0.0
        for p in range(4):
            for q in range(5):
                tr += Ai[p, q] * M[p, q]
        assert abs(y[i] - tr) <= 1e-12


def test_adjoint_identity_random_pairs():
    op = make_gaussian_operator(6, 6, 40, 8)
    for j in range(50):
        M = rand((6, 6), 100 + j)
        z = rand(40, 200 + j)
        lhs = float(op.apply(M) @ z)
        rhs = float(np.sum(M * op.adjoint(z)))
        assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1.0)


def test_linearity():
    op = make_gaussian_operator(5, 5, 30, 9)
    M, N = rand((5, 5), 1), rand((5, 5), 2)
    a, b = 1.7, -0.3
    lhs = op.apply(a * M + b * N)
    rhs = a * op.apply(M) + b * op.apply(N)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * np.linalg.norm(rhs)


def test_shape_errors():
    op = make_gaussian_operator(3, 3, 4, 1)
    with pytest.raises(ValueError, match="3x3"):
        op.apply(np.zeros((2, 3)))
    with pytest.raises(ValueError, match="length"):
        op.adjoint(np.zeros(5))


def test_rip_identity_is_zero():
    est = estimate_rip_delta(make_identity_operator(8, 8), 2, 10, 0)
    assert abs(est.delta_low) <= 1e-12 and abs(est.delta_high) <= 1e-12


def test_rip_gaussian_bounded(op700):
    est = estimate_rip_delta(op700, 9, 200, 0)
    assert est.trials == 200 and est.rank_probed == 9
    assert est.delta_high < 1 and np.isfinite(est.delta_low)


def test_rip_undersampled():
    op = make_gaussian_operator(10, 10, 1, 2)
    est = estimate_rip_delta(op, 2, 50, 3)
    assert est.delta_low > 0.9


def test_rip_deterministic(op700):
    assert estimate_rip_delta(op700, 3, 5, 1) == estimate_rip_delta(op700, 3, 5, 1)
