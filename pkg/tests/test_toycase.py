import numpy as np
import pytest

from factorgd.diagnostics import record
from factorgd.optimizer import GDState, asym_step
from factorgd.problem import init_toy
from factorgd.toycase import (
    ToyState,
    is_monotone,
    loss_bounds,
    phase_one_end,
    toy_equivalence,
    toy_initial,
    toy_loss,
    toy_problem,
    toy_step,
    toy_trajectory,
)


def test_step_hand_arithmetic():
    s = toy_step(toy_initial(0.5), 0.1)
    assert s.a == pytest.approx(0.5 - 0.1 * 0.5 / 36, abs=1e-15)
    assert s.a == pytest.approx(0.49861111111111111, abs=1e-15)
    assert s.b == pytest.approx(0.1625, abs=1e-15)
    assert s.t == 1


def test_b_zero_freezes_a():
    s = ToyState(0.7, 0.0, 0.2)
    for _ in range(50):
        s = toy_step(s, 0.1)
    assert s.a == 0.7 and s.b == 0.0


def test_alpha_fixed_point():
    assert toy_step(ToyState(0.1, 0.1, 1.0), 0.3).alpha_t == 1.0


def test_loss_values():
    assert toy_loss(ToyState(0.0, 0.3, 1.0), 6, 2) == 0.0
    assert toy_loss(toy_initial(0.5), 6, 2) == pytest.approx(2 * 0.75**2 + (0.5 / 6) ** 2, abs=1e-15)
    assert toy_loss(toy_initial(0.5), 6, 2) == pytest.approx(1.1319444444444444, abs=1e-15)


def test_loss_matches_full_record():
    n, r, alpha, eta = 6, 2, 0.5, 0.05
    inst = toy_problem(n, r)
    state = GDState(*init_toy(n, r, r + 1, alpha))
    toy = toy_initial(alpha)
    for _ in range(40):
        assert abs(record(state, inst).loss_fro2 - toy_loss(toy, n, r)) <= 1e-13
        state, toy = asym_step(state, inst, eta), toy_step(toy, eta)


def test_lower_bound_every_step():
    alpha, eta = 0.5, 0.05
    for s in toy_trajectory(alpha, eta, 500):
        lower, _ = loss_bounds(s.t, alpha, eta, 6, 0)
        assert toy_loss(s, 6, 2) >= lower


def test_two_sided_bound_small_alpha():
    alpha, eta, n = 0.1, 0.05, 6
    traj = toy_trajectory(alpha, eta, 3000)
    t1 = phase_one_end(traj)
    assert t1 is not None and t1 > 0
    assert traj[t1].alpha_t >= 0.5 and traj[t1 - 1].alpha_t < 0.5
    for s in traj[t1:]:
        lower, upper = loss_bounds(s.t, alpha, eta, n, t1)
        assert lower <= toy_loss(s, n, 2) <= upper


def test_phase_one_end_none():
    assert phase_one_end(toy_trajectory(0.01, 0.01, 3)) is None


def test_equivalence_preset():
    assert toy_equivalence(6, 2, 0.05, 0.5, 500) <= 1e-9


def test_equivalence_zero_steps_and_eta():
    assert toy_equivalence(6, 2, 0.05, 0.5, 0) == 0.0
    assert toy_equivalence(6, 2, 0.0, 0.5, 100) == 0.0


@pytest.mark.parametrize("eta", [0.01, 0.05])
@pytest.mark.parametrize("alpha", [0.1, 0.5])
def test_equivalence_grid(eta, alpha):
    assert toy_equivalence(6, 2, eta, alpha, 300) <= 1e-9


def test_equivalence_other_sizes():
    assert toy_equivalence(9, 3, 0.05, 0.3, 200) <= 1e-9


@pytest.mark.parametrize("alpha", [0.1, 0.5, 1.0])
def test_monotone(alpha):
    eta = 0.05
    assert eta * alpha**2 <= 0.25
    traj = toy_trajectory(alpha, eta, 500)
    assert is_monotone(traj)
    assert all(0 <= s.b <= s.a for s in traj)
    assert all(np.isfinite([s.a, s.b, s.alpha_t]).all() for s in traj)


def test_is_monotone_detects_increase():
    assert not is_monotone([ToyState(1.0, 0.5, 0.1), ToyState(1.1, 0.5, 0.1, 1)])
