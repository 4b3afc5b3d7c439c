import numpy as np
import pytest
import torch
from synthpde import Grid

from fno_harness import FNO2d, evaluate_ood, reference_solution


def test_reference_solution_linear_diff():
    f, u = reference_solution("linear_diff", Grid(33))
    assert np.all(u[0, :] == 0) and np.all(u[-1, :] == 0)
    assert np.all(u[:, 0] == 0) and np.all(u[:, -1] == 0)
    assert np.max(np.abs(u)) > 0
    # f(x, y) = x - y is antisymmetric under swapping x and y, so u is too
    np.testing.assert_allclose(u, -u.T, atol=1e-12)


def test_reference_solution_corner_abs():
    f, u = reference_solution("corner_abs", Grid(33))
    # symmetric forcing -> symmetric solution
    np.testing.assert_allclose(u, u.T, atol=1e-12)
    # positive forcing -> positive interior solution (maximum principle)
    assert np.min(u[1:-1, 1:-1]) > 0


def test_unknown_name_rejected():
    with pytest.raises(ValueError, match="unknown"):
        reference_solution("step", Grid(17))


def test_untrained_model_error_floor():
    # a randomly initialized network is far from the solution operator on
    # both out-of-distribution forcings
    torch.manual_seed(0)
    model = FNO2d(modes=4, width=8, in_channels=1)
    for name in ("linear_diff", "corner_abs"):
        out = evaluate_ood(model, name, Grid(33))
        assert out["rel_l2_vs_reference"] >= 0.5
        assert out["boundary_max_abs"] >= 0.0
        assert out["u_pred"].shape == (33, 33)
        assert out["u_ref"].shape == (33, 33)


def test_multichannel_model_rejected():
    model = FNO2d(modes=4, width=8, in_channels=3)
    with pytest.raises(ValueError, match="single-input-channel"):
        evaluate_ood(model, "linear_diff", Grid(17))
