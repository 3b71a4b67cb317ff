"""Shared independent oracles for the test suite.

Everything here deliberately avoids the implementation paths it checks:
rates come from brute-force complex arithmetic, counting statistics from
an ODE integration of the counting master equation and from literal
nested quadrature, so agreement is meaningful.
"""

import cmath
import math

import numpy as np
import pytest
from scipy import integrate


def brute_rate(M: int, alpha: float, beta: float, probe: int, k: int, offset=0j) -> float:
    """|alpha e^{i theta_k} + offset - (alpha+beta) e^{i theta_probe}|^2."""
    theta = lambda j: 2.0 * math.pi * (j - 1) / M
    field = (
        alpha * cmath.exp(1j * theta(k))
        + offset
        - (alpha + beta) * cmath.exp(1j * theta(probe))
    )
    return abs(field) ** 2


def ode_count_probabilities(seq, m_max: int) -> np.ndarray:
    """P_0..P_m_max via the counting master equation.

    p_j(t) = P(exactly j clicks by t); dp_j/dt = lam_{j-1} p_{j-1} - lam_j p_j.
    A stiff-safe high-order integrator at tight tolerance; completely
    independent of the exponential-polynomial calculus.
    """
    lam = np.asarray(seq[: m_max + 1], dtype=float)
    p0 = np.zeros(m_max + 1)
    p0[0] = 1.0

    def rhs(_, p):
        dp = -lam * p
        dp[1:] += lam[:-1] * p[:-1]
        return dp

    sol = integrate.solve_ivp(
        rhs, (0.0, 1.0), p0, method="DOP853", rtol=1e-12, atol=1e-14
    )
    return sol.y[:, -1]


def quad_one_click(l0: float, l1: float) -> float:
    """P_1 as the literal integral of the click density times survival."""
    val, _ = integrate.quad(
        lambda t: l0 * math.exp(-l0 * t) * math.exp(-l1 * (1.0 - t)), 0.0, 1.0,
        epsabs=1e-13, epsrel=1e-13,
    )
    return val


def quad_two_clicks(l0: float, l1: float, l2: float) -> float:
    """P_2 as the literal nested double integral."""
    val, _ = integrate.dblquad(
        lambda t2, t1: (
            l0 * math.exp(-l0 * t1)
            * l1 * math.exp(-l1 * (t2 - t1))
            * math.exp(-l2 * (1.0 - t2))
        ),
        0.0, 1.0,
        lambda t1: t1, lambda _: 1.0,
        epsabs=1e-12,
    )
    return val


@pytest.fixture
def qpsk_half():
    """The recurring demonstration point: M=4, |alpha|^2=0.5, |beta|^2=0.23."""
    from pskrx.core import PskAlphabet

    return PskAlphabet.from_power(4, 0.5), math.sqrt(0.23)
