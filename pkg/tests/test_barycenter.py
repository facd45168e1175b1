import numpy as np
import pytest

from entropic_gaussians.barycenter import (
    BarycenterProblem,
    barycenter,
    euclidean_grad_cost,
    retract,
    riemannian_grad,
)
from entropic_gaussians.errors import DimensionError, ParameterError, StepSizeError
from entropic_gaussians.gaussian import Gaussian, entropic_cost, wasserstein2_sq
from entropic_gaussians.kantorovich import kantorovich_estimator_gaussian
from entropic_gaussians.spd import SpdMatrix

from conftest import random_spd


def _cost(s, q, lam):
    if lam == 0:
        return wasserstein2_sq(Gaussian(np.zeros(q.dim), s), q)
    return entropic_cost(Gaussian(np.zeros(q.dim), s), q, lam).total


def _fd_grad(s, q, lam, rel=1e-5):
    n = s.shape[0]
    g = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            h = rel * max(abs(s[i, j]), 1e-3)
            e = np.zeros((n, n))
            e[i, j] = e[j, i] = h
            d = (_cost(s + e, q, lam) - _cost(s - e, q, lam)) / (2 * h)
            # A symmetric perturbation of an off-diagonal pair moves both entries.
            g[i, j] = g[j, i] = d if i == j else d / 2
    return g


class TestGradient:
    def test_matches_fd(self):
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(50):
            n = int(rng.integers(1, 5))
            s = random_spd(rng, n, cond=20)
            q = Gaussian(np.zeros(n), random_spd(rng, n, cond=20))
            lam = float(rng.uniform(0.05, 2.0))
            g = euclidean_grad_cost(s, q, lam).array
            fd = _fd_grad(s, q, lam)
            worst = max(worst, np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-3))
        assert worst <= 1e-5

    def test_scalar_example(self):
        lam, b = 0.5, 2.0

        def f(s):
            r = np.sqrt(s * b + lam**2)
            return s + b - 2 * r - 2 * lam * np.log(r - lam)

        h = 1e-6
        fd = (f(1 + h) - f(1 - h)) / (2 * h)
        g = euclidean_grad_cost([[1.0]], Gaussian([0.0], [[b]]), lam).array[0, 0]
        assert g == pytest.approx(fd, abs=1e-6)

    def test_symmetric(self, rng):
        g = euclidean_grad_cost(random_spd(rng, 4), Gaussian(np.zeros(4), random_spd(rng, 4)), 0.3).array
        assert np.array_equal(g, g.T)

    def test_self_transport(self, rng):
        s = np.diag([1.0, 2.0, 3.0])
        g = euclidean_grad_cost(s, Gaussian(np.zeros(3), s), 1e-10).array
        assert np.linalg.norm(g) <= 1e-8

    def test_errors(self):
        with pytest.raises(DimensionError):
            euclidean_grad_cost(np.eye(2), Gaussian([0.0], [[1.0]]), 0.1)
        with pytest.raises(ParameterError):
            euclidean_grad_cost(np.eye(1), Gaussian([0.0], [[1.0]]), -0.1)


class TestManifold:
    def test_riemannian_grad(self, rng):
        assert np.array_equal(riemannian_grad(np.diag([1.0, 1.0]), np.diag([2.0, 1.0])).array, np.diag([4.0, 1.0]))
        e = rng.standard_normal((3, 3))
        e = e + e.T
        assert np.allclose(riemannian_grad(e, np.eye(3)).array, e)
        g = riemannian_grad(e, random_spd(rng, 3)).array
        assert np.max(np.abs(g - g.T)) <= 1e-12

    def test_retract_examples(self, rng):
        x = random_spd(rng, 3)
        assert np.allclose(retract(x, np.zeros((3, 3))).array, x, atol=1e-12)
        assert np.allclose(retract(np.eye(2), np.diag([np.log(2), np.log(3)])).array, np.diag([2.0, 3.0]))

    def test_retract_spd(self):
        for seed in range(100):
            rng = np.random.default_rng(seed)
            x = random_spd(rng, 4)
            v = rng.standard_normal((4, 4))
            out = retract(x, v + v.T)
            assert isinstance(out, SpdMatrix)
            assert np.linalg.eigvalsh(out.array)[0] > 0

    def test_retract_matches_definition(self, rng):
        from scipy.linalg import expm

        x = random_spd(rng, 3)
        v = rng.standard_normal((3, 3))
        v = 0.3 * (v + v.T)
        assert np.allclose(retract(x, v).array, x @ expm(np.linalg.solve(x, v)), atol=1e-10)


class TestBarycenter:
    def test_identical_inputs(self, rng):
        s = random_spd(rng, 3)
        g = Gaussian(np.ones(3), s)
        res = barycenter(BarycenterProblem([g, g, g], lam=0.0))
        assert res.final_grad_norm <= 1e-8 and res.converged
        assert np.allclose(res.barycenter.cov.array, s, atol=1e-10)

    def test_one_dimensional_pair(self):
        res = barycenter(BarycenterProblem([Gaussian([0.0], [[1.0]]), Gaussian([0.0], [[4.0]])]))
        assert res.barycenter.cov.array[0, 0] == pytest.approx(2.25, abs=1e-5)

    def test_one_dimensional_pair_scan(self):
        grid = np.linspace(1.0, 4.0, 30001)
        vals = [_cost([[s]], Gaussian([0.0], [[1.0]]), 0) + _cost([[s]], Gaussian([0.0], [[4.0]]), 0) for s in grid]
        assert grid[int(np.argmin(vals))] == pytest.approx(2.25, abs=1e-4)

    @pytest.mark.parametrize("lam", [0.1, 0.5, 2.0])
    def test_single_input_is_estimator(self, rng, lam):
        q = Gaussian(rng.standard_normal(3), random_spd(rng, 3))
        res = barycenter(BarycenterProblem([q], lam=lam))
        ref = kantorovich_estimator_gaussian(q, lam)
        assert np.max(np.abs(res.barycenter.cov.array - ref.cov.array)) <= 1e-6
        assert np.array_equal(res.barycenter.mean, q.mean)

    def test_mean_is_average(self, rng):
        qs = [Gaussian(rng.standard_normal(2), random_spd(rng, 2)) for _ in range(4)]
        res = barycenter(BarycenterProblem(qs, lam=0.2))
        assert np.allclose(res.barycenter.mean, np.mean([q.mean for q in qs], axis=0), atol=1e-15)

    def test_monotone_trace(self, rng):
        qs = [Gaussian(np.zeros(4), random_spd(rng, 4, cond=50)) for _ in range(5)]
        res = barycenter(BarycenterProblem(qs, lam=0.3))
        assert np.all(np.diff(res.objective_trace) <= 0)
        # The default tolerance can sit below the rounding floor of the objective.
        assert res.status in ("converged", "stalled")
        assert res.final_grad_norm <= 1e-5

    def test_permutation_invariance(self, rng):
        qs = [Gaussian(rng.standard_normal(3), random_spd(rng, 3)) for _ in range(4)]
        a = barycenter(BarycenterProblem(qs, lam=0.1)).barycenter
        b = barycenter(BarycenterProblem(qs[::-1], lam=0.1)).barycenter
        c = barycenter(BarycenterProblem([qs[2], qs[0], qs[3], qs[1]], lam=0.1)).barycenter
        for other in (b, c):
            assert np.max(np.abs(a.cov.array - other.cov.array)) <= 1e-9
            assert np.max(np.abs(a.mean - other.mean)) <= 1e-9

    def test_max_iter_status(self, rng):
        qs = [Gaussian(np.zeros(3), random_spd(rng, 3, cond=100)) for _ in range(3)]
        res = barycenter(BarycenterProblem(qs, lam=0.1, max_iter=1))
        assert res.status == "max_iter" and not res.converged and res.iterations == 1

    def test_fixed_step_diverges(self):
        qs = [Gaussian([0.0], [[1.0]]), Gaussian([0.0], [[100.0]])]
        with pytest.raises(StepSizeError) as info:
            barycenter(BarycenterProblem(qs, lam=0.0, step_size=1e3), backtracking=False)
        assert info.value.trace

    def test_problem_validation(self):
        with pytest.raises(ParameterError):
            BarycenterProblem([])
        with pytest.raises(DimensionError):
            BarycenterProblem([Gaussian([0.0], [[1.0]]), Gaussian(np.zeros(2), np.eye(2))])
        with pytest.raises(ParameterError):
            BarycenterProblem([Gaussian([0.0], [[1.0]])], lam=-1.0)
        with pytest.raises(ParameterError):
            BarycenterProblem([Gaussian([0.0], [[1.0]])], step_size=0.0)
