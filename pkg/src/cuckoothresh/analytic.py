"""Closed forms and fixed points behind the k-ary cuckoo hashing load threshold.

Conventions: ``xi`` is the Poisson parameter of the 2-core degree law,
``mu(xi)`` the mean of a Poisson(xi) variable conditioned on being >= 2,
and ``c`` the load (items per table slot). Every scalar equation is solved
by plain bisection; the defining maps are monotone so no safeguarding is
needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy.special import xlogy

__all__ = [
    "ThresholdSolution",
    "RateFunctionEval",
    "bisect_increasing",
    "truncated_poisson_mean",
    "solve_xi_star",
    "threshold_c_star",
    "lambda2",
    "lambda2_argmin",
    "core_objective",
    "largest_fixed_point_xbar",
    "core_xi",
    "core_fractions",
    "solve_Tz",
    "rate_I",
    "rate_function",
    "entropy_H",
    "f_beta_q",
    "f_critical",
    "h_beta",
]

BISECT_XTOL = 1e-12
BISECT_MAXITER = 200
_SERIES_CUTOFF = 1e-2


@dataclass(frozen=True)
class ThresholdSolution:
    k: int
    xi_star: float
    c_star: float
    residual: float
    limit_case: bool = False


@dataclass(frozen=True)
class RateFunctionEval:
    z: float
    xi: float
    t_z: float
    value: float


def bisect_increasing(g: Callable[[float], float], target: float, lo: float, hi: float,
                      xtol: float = BISECT_XTOL, maxiter: int = BISECT_MAXITER) -> float:
    """Solve ``g(x) = target`` for increasing g with ``g(lo) <= target <= g(hi)``."""
    if g(lo) > target or g(hi) < target:
        raise ValueError(f"target {target} not bracketed by [{lo}, {hi}]")
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi) or hi - lo <= xtol * max(1.0, abs(mid)):
            break
        if g(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _expm1mx(x: float) -> float:
    """e^x - 1 - x without cancellation near 0."""
    if abs(x) < _SERIES_CUTOFF:
        # x^2/2 * (1 + x/3 + x^2/12 + x^3/60 + x^4/360)
        return 0.5 * x * x * (1.0 + x / 3.0 * (1.0 + x / 4.0 * (1.0 + x / 5.0 * (1.0 + x / 6.0))))
    return math.expm1(x) - x


def _log_expm1mx(x: float) -> float:
    """log(e^x - 1 - x) for x > 0, overflow-free for large x."""
    if x > 1.0:
        return x + math.log1p(-(1.0 + x) * math.exp(-x))
    return math.log(_expm1mx(x))


def truncated_poisson_mean(xi: float) -> float:
    """Mean of Poisson(xi) conditioned on >= 2: ``xi (e^xi - 1) / (e^xi - xi - 1)``."""
    if xi <= 0:
        raise ValueError(f"xi must be positive, got {xi}")
    if xi > 1.0:
        emx = math.exp(-xi)
        return xi * (1.0 - emx) / (1.0 - emx - xi * emx)
    return xi * math.expm1(xi) / _expm1mx(xi)


def solve_xi_star(k: int) -> float:
    """Root of ``truncated_poisson_mean(xi) = k``; defined for k >= 3."""
    if k < 3:
        raise ValueError(
            f"xi* exists only for k >= 3 (got k={k}); k = 2 is the limit xi -> 0 handled by "
            "threshold_c_star, which returns c = 1/2")
    return bisect_increasing(truncated_poisson_mean, float(k), 1e-9, k + 2.0)


def core_objective(x: float, k: int) -> float:
    """``x / (1 - e^-x)^(k-1)``; equals c*k at the core parameter x = xi."""
    return x / (-math.expm1(-x)) ** (k - 1)


def threshold_c_star(k: int) -> ThresholdSolution:
    """The load threshold c_k* for k choices per item."""
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    if k == 2:
        return ThresholdSolution(k=2, xi_star=0.0, c_star=0.5, residual=0.0, limit_case=True)
    xi = solve_xi_star(k)
    c = core_objective(xi, k) / k
    return ThresholdSolution(k=k, xi_star=xi, c_star=c,
                             residual=abs(k - truncated_poisson_mean(xi)))


def lambda2_argmin(k: int) -> float:
    """Minimiser of :func:`core_objective`, the root of ``e^x - 1 = (k-1) x``."""
    if k < 3:
        raise ValueError(f"need k >= 3, got {k}")
    # expm1(x)/x increases from 1, so the stationarity condition is a monotone root
    ratio = lambda x: math.expm1(x) / x
    hi = 1.0
    while ratio(hi) < k - 1:
        hi *= 2.0
    return bisect_increasing(ratio, float(k - 1), 1e-9, hi)


def lambda2(k: int) -> float:
    """Mean degree ck at which a nonempty 2-core appears: ``min_x core_objective(x, k)``."""
    return core_objective(lambda2_argmin(k), k)


def largest_fixed_point_xbar(c: float, k: int, tol: float = 1e-14, maxiter: int = 1_000_000) -> float:
    """Largest root of ``x = (1 - e^{-x c k})^{k-1}`` in [0, 1]; 0 if only the trivial root exists.

    Iterating from x = 1 decreases monotonically onto the largest root.
    """
    if c <= 0:
        raise ValueError(f"c must be positive, got {c}")
    if k < 3:
        raise ValueError(f"need k >= 3, got {k}")
    ck = c * k
    x = 1.0
    for _ in range(maxiter):
        nxt = (-math.expm1(-x * ck)) ** (k - 1)
        if nxt < 1e-12:
            return 0.0
        if abs(nxt - x) < tol:
            return nxt
        x = nxt
    return x


def core_xi(c: float, k: int) -> float:
    """Core Poisson parameter ``xi = xbar * c * k`` (0 when the core is empty)."""
    return largest_fixed_point_xbar(c, k) * c * k


def core_fractions(c: float, k: int) -> tuple[float, float]:
    """Predicted (vertices, edges) of the 2-core per table slot at load c."""
    xi = core_xi(c, k)
    if xi == 0.0:
        return 0.0, 0.0
    emx = math.exp(-xi)
    return emx * _expm1mx(xi), xi * (-math.expm1(-xi)) / k


def solve_Tz(z: float) -> float:
    """Positive T with ``truncated_poisson_mean(T) = z``; needs z > 2."""
    if not z > 2.0:
        raise ValueError(f"T_z is defined for z > 2, got {z}")
    # mu(T) > T, so the root lies below z
    return bisect_increasing(truncated_poisson_mean, z, 1e-100, z)


def _check_xi(xi: float) -> None:
    if not xi > 0:
        raise ValueError(f"xi must be positive, got {xi}")


def rate_I(z: float, xi: float) -> float:
    """Large-deviation rate for the sample mean of 2-truncated Poisson(xi) degrees."""
    _check_xi(xi)
    if z < 2.0:
        raise ValueError(f"rate function is defined for z >= 2, got {z}")
    if z == 2.0:
        return math.log(2.0) - 2.0 * math.log(xi) + _log_expm1mx(xi)
    t = solve_Tz(z)
    return z * (math.log(t) - math.log(xi)) - _log_expm1mx(t) + _log_expm1mx(xi)


def rate_function(z: float, xi: float) -> RateFunctionEval:
    value = rate_I(z, xi)
    t = 0.0 if z == 2.0 else solve_Tz(z)
    return RateFunctionEval(z=z, xi=xi, t_z=t, value=value)


def entropy_H(x: float) -> float:
    """Natural-log binary entropy, H(0) = H(1) = 0."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"entropy argument must lie in [0, 1], got {x}")
    return float(-xlogy(x, x) - xlogy(1.0 - x, 1.0 - x))


def f_beta_q(beta: float, q: float, k: int, xi: float) -> float:
    """Exponent bounding the chance that a core vertex set of relative size beta,
    holding a fraction q of the clones, is maximal 1-dense.

    ``2H(b) + (1-b) ln(2^k-k-1) - k H(q) - (1-b) I(k(1-q)/(1-b))``.
    At beta = q = 1 the last term vanishes and f = 0.
    """
    _check_xi(xi)
    if not 0.0 < beta <= 1.0 or not 0.0 < q <= 1.0:
        raise ValueError(f"beta and q must lie in (0, 1], got beta={beta}, q={q}")
    if q < beta:
        raise ValueError(f"need q >= beta, got q={q} < beta={beta}")
    spread = (1.0 - beta) * math.log(2.0**k - k - 1)
    base = 2.0 * entropy_H(beta) + spread - k * entropy_H(q)
    if beta == 1.0:
        return base
    z = k * (1.0 - q) / (1.0 - beta)
    if z < 2.0 - 1e-12:
        raise ValueError(f"rate function argument k(1-q)/(1-beta) = {z} is below 2")
    return base - (1.0 - beta) * rate_I(max(z, 2.0), xi)


def f_critical(beta: float, q0: float, k: int, xi: float) -> float:
    """f(beta, q0) rewritten at a stationary point q0 of q -> f(beta, q)."""
    _check_xi(xi)
    t = 1.0 - beta
    inner = k * q0 - xi * t
    if inner <= 0 or not 0.0 < q0 <= 1.0:
        raise ValueError(f"f_critical undefined at beta={beta}, q0={q0}, xi={xi}")
    return (2.0 * entropy_H(beta)
            + t * (math.log(2.0**k - k - 1) - _log_expm1mx(xi))
            + k * math.log(q0)
            + t * (2.0 * math.log(xi) - math.log(q0) - math.log(inner))
            + float(xlogy(t, 1.0 - q0)) + float(xlogy(t, t)))


def h_beta(beta: float, k: int, xi: float) -> float:
    """:func:`f_critical` at the largest admissible q0 = 1 - 2(1-beta)/k."""
    _check_xi(xi)
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    t = 1.0 - beta
    a = k - 2.0 + 2.0 * beta
    inner = a - xi * t
    if inner <= 0:
        raise ValueError(f"log of nonpositive argument: k-2+2b-xi(1-b) = {inner}")
    return (2.0 * entropy_H(beta)
            + t * (math.log(2.0**k - k - 1) - _log_expm1mx(xi))
            + k * math.log(a / k)
            + t * (2.0 * math.log(xi) + math.log(2.0) - math.log(a) - math.log(inner))
            + 2.0 * float(xlogy(t, t)))
