import math

import numpy as np
import pytest

import mlsa


def two_state(p=0.2):
    chain = mlsa.FiniteChain.from_kernel(np.array([[1 - p, p], [p, 1 - p]]))
    A = [np.array([[-1.0]]), np.array([[-0.5]])]
    b = [np.array([1.0]), np.array([0.0])]
    return chain, mlsa.build_problem(chain, A, b)


def test_version_is_set():
    assert mlsa.__version__


def test_rr_coefficients_match_known_values():
    scheme = mlsa.rr_coefficients([1.0, 2.0, 3.0])
    assert np.allclose(scheme.h, [3.0, -3.0, 1.0], atol=1e-12)
    assert mlsa.rr_residual(scheme) < 1e-10
    assert math.isclose(scheme.sum_abs_h, 7.0)


def test_duplicate_stepsizes_raise_with_code():
    with pytest.raises(mlsa.Error) as info:
        mlsa.rr_coefficients([0.1, 0.1])
    assert info.value.code == "DegenerateScheme"


def test_random_problem_is_deterministic():
    c1, p1 = mlsa.random_problem(5, 3, 7)
    c2, p2 = mlsa.random_problem(5, 3, 7)
    assert np.array_equal(c1.kernel, c2.kernel)
    assert np.array_equal(p1.theta_star, p2.theta_star)
    assert np.allclose(c1.stationary @ c1.kernel, c1.stationary, atol=1e-12)
    assert np.allclose(p1.Abar @ p1.theta_star, -p1.bbar, atol=1e-10)


def test_exact_bias_matches_first_order_expansion():
    chain, problem = two_state()
    expansion = mlsa.bias_expansion(problem, chain, 3)
    for alpha in (0.01, 0.005):
        exact = mlsa.exact_stationary_mean(problem, chain, alpha)
        assert exact.residual < 1e-10
        first = alpha * expansion.B[0]
        assert np.linalg.norm(exact.bias - first) < 10 * alpha**2 * np.linalg.norm(expansion.B[1])


def test_two_step_extrapolation_cancels_first_order_bias():
    chain, problem = two_state()
    a = 0.02
    scheme = mlsa.rr_coefficients([a, 2 * a])
    means = [mlsa.exact_stationary_mean(problem, chain, s).mean for s in scheme.alphas]
    rr_bias = np.linalg.norm(mlsa.rr_combine(means, scheme) - problem.theta_star)
    ta_bias = np.linalg.norm(means[0] - problem.theta_star)
    assert rr_bias < 0.05 * ta_bias


def test_iid_chain_has_no_bias():
    pi = np.array([0.2, 0.3, 0.5])
    chain = mlsa.FiniteChain.from_kernel(np.tile(pi, (3, 1)))
    _, base = mlsa.random_problem(3, 2, 4)
    problem = mlsa.build_problem(chain, list(base.A), list(base.b))
    assert mlsa.zero_bias_condition(problem, chain).holds
    assert np.linalg.norm(mlsa.exact_stationary_mean(problem, chain, 0.1).bias) < 1e-10


def test_simulation_is_seed_deterministic_and_converges():
    chain, problem = two_state()
    r1 = mlsa.simulate(problem, chain, 0.05, 20000, seed=3)
    r2 = mlsa.simulate(problem, chain, 0.05, 20000, seed=3)
    assert r1.err_ta == r2.err_ta
    assert not r1.diverged
    assert r1.k[-1] == 20000
    exact = mlsa.exact_stationary_mean(problem, chain, 0.05)
    assert np.linalg.norm(r1.theta_bar[-1] - exact.mean) < 0.05


def test_td_instance_fixed_point():
    mrp = mlsa.problematic_mrp()
    inst = mlsa.td_problem(mrp, mlsa.polynomial_features(mrp.nS))
    fp = mlsa.projected_fixed_point(mrp, mlsa.polynomial_features(mrp.nS))
    assert np.allclose(inst.problem.theta_star, fp.theta_star, rtol=1e-8, atol=1e-8)


def test_regression_run_shapes():
    run = mlsa.regression_run("iid-uniform", 0.02, 5000, seed=1)
    assert len(run.k) == len(run.err_ta)
    assert run.theta_bar[-1].shape == (2,)
    with pytest.raises(mlsa.Error):
        mlsa.regression_run("nonsense", 0.02, 10)
