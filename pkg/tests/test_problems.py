import math

import numpy as np
import pytest

from bsdegbt.problems import (ALLEN_CAHN_Y0, ExampleSpec, analytic_solution, example,
                              make_example, oscillatory_solution)


def central_grad(fun, x, h=1e-6):
    g = np.empty_like(x)
    for j in range(x.shape[1]):
        e = np.zeros(x.shape[1])
        e[j] = h
        g[:, j] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


def pde_residual(problem, t, x, h=1e-4):
    """u_t + L u + f(t, x, u, Z) from finite differences of the analytic Y."""
    u = lambda tt, xx: problem.analytic(tt, xx)[0]
    scale = np.asarray(problem.sde.scale, dtype=float)
    ut = (u(t + h, x) - u(t - h, x)) / (2 * h)
    lap = np.zeros(len(x))
    for j in range(x.shape[1]):
        e = np.zeros(x.shape[1])
        e[j] = h
        lap += (u(t, x + e) - 2 * u(t, x) + u(t, x - e)) / h ** 2
    y, z = problem.analytic(t, x)
    return ut + 0.5 * scale ** 2 * lap + problem.driver(t, x, y, z)


def test_quadratic_z_references():
    p = example("ex1", 100)
    y, z = analytic_solution(p, 0.0, p.x0)
    assert y[0] == pytest.approx(0.84147, abs=5e-6)
    assert np.all(z == 0)
    assert p.reference_y0 == pytest.approx(math.sin(1.0))


def test_reaction_diffusion_references():
    p = example("ex2", 100)
    y, z = analytic_solution(p, 0.0, p.x0)
    assert y[0] == pytest.approx(1.7)
    np.testing.assert_allclose(z[0], 0.06065, atol=5e-6)
    np.testing.assert_allclose(p.reference_z0, z[0])


def test_burgers_references():
    p = example("ex5", 100)
    y, z = analytic_solution(p, 0.0, p.x0)
    assert y[0] == 0.5
    np.testing.assert_allclose(z[0], 0.17678, atol=5e-6)


@pytest.mark.parametrize("d,ref", [(1, 1.3776), (2, 0.5707), (5, 0.8466), (8, 1.16032),
                                   (10, -0.21489), (20, 0.25904), (50, -0.47055)])
def test_oscillatory_reference_values(d, ref):
    p = example("ex6", d)
    assert p.reference_y0 == pytest.approx(ref, abs=6e-5)
    assert oscillatory_solution(p, 0.0, p.x0)[0] == pytest.approx(p.reference_y0)


def test_allen_cahn_and_two_rate_references():
    assert example("ex4", 100).reference_y0 == 1.04510
    assert example("ex4", 1000).reference_y0 == ALLEN_CAHN_Y0[1000]
    assert example("ex4", 7).reference_y0 is None
    assert example("ex3", 100).reference_y0 == 21.2988
    assert example("ex3", 10).reference_y0 is None
    assert not example("ex3", 100).has_gradient


@pytest.mark.parametrize("name", ["ex1", "ex2", "ex5"])
def test_terminal_consistency(name):
    p = example(name, 7)
    x = np.random.default_rng(0).normal(size=(100, 7))
    y, _ = p.analytic(p.maturity, x)
    np.testing.assert_allclose(y, p.terminal(x), atol=1e-10, rtol=0)


@pytest.mark.parametrize("name", ["ex1", "ex2", "ex5", "ex6"])
def test_gradient_matches_finite_differences(name):
    p = example(name, 4)
    x = np.random.default_rng(1).normal(size=(20, 4)) + 0.3
    np.testing.assert_allclose(p.terminal_gradient(x), central_grad(p.terminal, x),
                               rtol=1e-5, atol=1e-8)


def test_allen_cahn_gradient_one_hot():
    p = example("ex4", 5)
    x = np.array([[0.1, 2.0, -1.0, 2.0, 0.0], [-3.0, -1.0, -2.0, -4.0, -1.5]])
    g = p.terminal_gradient(x)
    np.testing.assert_allclose(g[0], [0, 1 / 5, 0, 0, 0])
    np.testing.assert_allclose(g[1], [0, 1 / 2, 0, 0, 0])
    xs = np.random.default_rng(2).normal(size=(20, 5))
    np.testing.assert_allclose(g := p.terminal_gradient(xs), central_grad(p.terminal, xs),
                               rtol=1e-5, atol=1e-8)
    assert np.all((g != 0).sum(axis=1) == 1)


@pytest.mark.parametrize("d", [1, 3, 10])
def test_quadratic_z_solves_its_pde(d):
    p = example("ex1", d)
    x = np.random.default_rng(d).normal(size=(30, d))
    assert np.max(np.abs(pde_residual(p, 0.5, x))) < 1e-4
    _, z = p.analytic(0.5, x)
    np.testing.assert_allclose(z, central_grad(lambda xx: p.analytic(0.5, xx)[0], x),
                               rtol=1e-5, atol=1e-8)


def test_reaction_diffusion_driver_vanishes_on_solution():
    p = example("ex2", 10)
    rng = np.random.default_rng(3)
    for t in rng.uniform(0, 1, 10):
        x = rng.normal(size=(10, 10)) * 2
        y, z = p.analytic(t, x)
        assert np.max(p.driver(t, x, y, z)) <= 1e-20
    assert np.max(np.abs(pde_residual(p, 0.4, rng.normal(size=(20, 10))))) < 1e-4


def test_burgers_solution_needs_sigma_equal_to_dimension():
    # the logistic pair solves the PDE exactly when sigma = d; for other
    # sigma the residual does not vanish
    x = np.random.default_rng(4).normal(size=(20, 3))
    exact = make_example(ExampleSpec("ex5", 3, sigma=3.0))
    assert np.max(np.abs(pde_residual(exact, 0.2, x))) < 1e-4
    other = make_example(ExampleSpec("ex5", 3, sigma=3.0 / math.sqrt(2)))
    assert np.max(np.abs(pde_residual(other, 0.2, x))) > 1e-2


def test_oscillatory_solution_solves_its_pde():
    d = 3
    p = example("ex6", d)
    rng = np.random.default_rng(5)
    x = rng.normal(size=(40, d)) * 0.8
    x = x[np.all(np.abs(x) > 1e-2, axis=1)]
    u = lambda t, xx: oscillatory_solution(p, t, xx)
    h, t = 1e-4, 0.3
    ut = (u(t + h, x) - u(t - h, x)) / (2 * h)
    lap = sum((u(t, x + h * e) - 2 * u(t, x) + u(t, x - h * e)) / h ** 2 for e in np.eye(d))
    resid = ut + lap / (2 * d) + p.driver(t, x, u(t, x), np.zeros_like(x))
    assert np.max(np.abs(resid)) < 1e-4


def test_two_rate_payoff():
    p = example("ex3", 3)
    x = np.array([[100.0, 130.0, 90.0], [160.0, 0.0, 0.0], [110.0, 119.0, 50.0]])
    np.testing.assert_allclose(p.terminal(x), [10.0, 40.0 - 20.0, 0.0])
    assert np.all(p.x0 == 100.0)


def test_allen_cahn_picard_map_contracts():
    dt = 0.03
    for y in np.linspace(-2, 2, 41):
        slope = abs(0.5 * dt * (1 - 3 * y * y))
        assert slope < 1


def test_unknown_example_and_bad_params():
    with pytest.raises(ValueError):
        example("ex9", 3)
    with pytest.raises(ValueError):
        ExampleSpec("ex1", 3, alpha=0.7)
    with pytest.raises(ValueError):
        ExampleSpec("ex5", 0)
    assert example("Ex4AllenCahn", 2).name == "ex4"


def test_no_closed_form_for_ex3_ex4_ex6():
    for name in ("ex3", "ex4", "ex6"):
        p = example(name, 2)
        assert analytic_solution(p, 0.1, np.zeros((1, 2))) is None
