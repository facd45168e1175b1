import sys

import numpy as np
import pytest
from scipy import integrate

from entropic_gaussians.qnormal import QNormal, qnormal_coupling, qnormal_density


def random_spd(rng, n, cond=None):
    """Random SPD matrix; with ``cond`` its eigenvalues are log-spaced in [1, cond]."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    if cond is None:
        a = rng.standard_normal((n, n))
        return a @ a.T + 0.5 * np.eye(n)
    w = np.logspace(0, np.log10(cond), n) if n > 1 else np.ones(1)
    m = (q * w) @ q.T
    return 0.5 * (m + m.T)


def random_orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def qnormal_marginal_error(q, lam, rule, literal_scale=False):
    """Sup-norm gap between the x-marginal of the 1D coupling and its input, by quadrature."""
    p, r = QNormal([0.0], [[1.0]], q), QNormal([0.5], [[2.0]], q)
    cpl = qnormal_coupling(p, r, lam, rule=rule)
    xs = np.linspace(-8, 8, 33)
    errs = []
    for x in xs:
        m, _ = integrate.quad(lambda y: float(cpl.pdf(np.array([x, y]), literal_scale)), -np.inf, np.inf, epsabs=1e-12)
        errs.append(abs(m - float(qnormal_density(np.array([x]), p))))
    return max(errs)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
