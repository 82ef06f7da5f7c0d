"""Uplink power control by successive convex approximation.

Maximizing the sum rate is equivalent to minimizing the product of
per-user ratios

    prod_k Lambda_k(eta) / (Lambda_k(eta) + Gamma_k(eta))

whose numerator and denominator are both posynomials in the power
coefficients eta, so the problem is a (nonconvex) complementary GP. Each
round condenses the denominator posynomial into its AM-GM monomial
minorant at the current iterate, which turns the ratio into a posynomial;
in log variables y = log(eta) the condensed objective

    F(y) = sum_k [ log(sum_i w_ki e^{y_i} + c_k) - nu_k . y ]

is smooth and convex over the box [log eta_min, 0]^K and is solved with
L-BFGS-B. Objective values never increase across rounds because each
condensation touches the true objective at the expansion point and bounds
it from below elsewhere.

Users with an empty serving set contribute no ratio (their rate is pinned
to zero) but their transmit power stays a decision variable, since it
still interferes with everyone else.
"""

import dataclasses

import numpy as np
import scipy.optimize


class PowerOptError(RuntimeError):
    """Inner solver failure; carries the partial objective trace."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = list(trace)


@dataclasses.dataclass(eq=False)
class PosyRatioProblem:
    """Coefficient data of the product-of-ratios program.

    Lambda_k(eta)           = num_w[k] . eta + lambda1[k]
    Lambda_k + Gamma_k      = (num_w[k] + delta3 diagonal row k) . eta + lambda1[k]
    """

    delta1: np.ndarray
    delta2: np.ndarray
    delta3: np.ndarray
    lambda1: np.ndarray

    @classmethod
    def from_breakdown(cls, breakdown):
        return cls(delta1=breakdown.delta1, delta2=breakdown.delta2,
                   delta3=breakdown.delta3, lambda1=breakdown.lambda1)

    @property
    def num_users(self):
        return self.lambda1.size

    @property
    def active(self):
        return self.lambda1 > 0

    def denominator_weights(self):
        """Rows of Lambda_k's eta coefficients (delta3 diagonal excluded)."""
        off3 = self.delta3 - np.diag(np.diag(self.delta3))
        return self.delta1 + self.delta2 + off3

    def full_weights(self):
        """Rows of (Lambda_k + Gamma_k)'s eta coefficients."""
        return self.delta1 + self.delta2 + self.delta3


def p3_objective(problem, eta):
    """Product of Lambda/(Lambda+Gamma) over users with a serving set."""
    eta = np.asarray(eta, dtype=float)
    act = problem.active
    if not act.any():
        return 1.0
    lam = problem.denominator_weights() @ eta + problem.lambda1
    tot = problem.full_weights() @ eta + problem.lambda1
    return float(np.prod(lam[act] / tot[act]))


@dataclasses.dataclass(eq=False)
class Monomial:
    """c * prod_i eta_i^{a_i}."""

    coefficient: float
    exponents: np.ndarray
    log_coefficient: float

    def evaluate(self, eta):
        eta = np.asarray(eta, dtype=float)
        sel = self.exponents != 0
        return self.coefficient * np.prod(eta[..., sel] ** self.exponents[sel],
                                          axis=-1)


def condense_monomial(weights, constant, eta_prev):
    """AM-GM monomial minorant of w . eta + constant at eta_prev.

    Exact at the expansion point, a lower bound everywhere on eta > 0.
    """
    weights = np.asarray(weights, dtype=float)
    eta_prev = np.asarray(eta_prev, dtype=float)
    if np.any((weights > 0) & (eta_prev <= 0)):
        raise ValueError("expansion point must be positive where weights are")
    value = float(weights @ eta_prev + constant)
    if value <= 0:
        raise ValueError("posynomial value at the expansion point must be positive")
    nu = weights * eta_prev / value
    nu0 = constant / value
    log_coef = 0.0
    pos = nu > 0
    if pos.any():
        log_coef += float((nu[pos] * (np.log(weights[pos]) - np.log(nu[pos]))).sum())
    if nu0 > 0:
        log_coef += nu0 * (np.log(constant) - np.log(nu0))
    return Monomial(coefficient=float(np.exp(log_coef)), exponents=nu,
                    log_coefficient=log_coef)


def condense_denominator(problem, k, eta_prev):
    """Condense user k's ratio denominator Lambda_k + Gamma_k at eta_prev.

    Replacing the denominator by its monomial minorant turns the ratio into
    a posynomial that upper-bounds it, so minimizing the condensed problem
    can never increase the true objective.
    """
    return condense_monomial(problem.full_weights()[k],
                             problem.lambda1[k], eta_prev)


@dataclasses.dataclass(eq=False)
class CondensedProblem:
    """One SCA round: posynomial numerators over monomial denominators."""

    num_w: np.ndarray      # (A, K) numerator weights, active users only
    num_c: np.ndarray      # (A,) numerator constants
    nu: np.ndarray         # (A, K) denominator monomial exponents
    active_index: np.ndarray


def condense_problem(problem, eta_prev):
    act = np.flatnonzero(problem.active)
    lam_w = problem.denominator_weights()
    nu = np.zeros((act.size, problem.num_users))
    for row, k in enumerate(act):
        nu[row] = condense_denominator(problem, k, eta_prev).exponents
    return CondensedProblem(num_w=lam_w[act], num_c=problem.lambda1[act],
                            nu=nu, active_index=act)


def _projected_residual(y, grad, lo, hi, edge_tol=1e-9):
    at_lo = y <= lo + edge_tol
    at_hi = y >= hi - edge_tol
    r = np.abs(grad)
    r[at_lo] = np.maximum(0.0, -grad[at_lo])
    r[at_hi] = np.maximum(0.0, grad[at_hi])
    return float(r.max())


def solve_condensed_gp(condensed, eta_start, eta_min=1e-6, maxiter=500,
                       residual_tol=1e-6):
    """Minimize the condensed objective over [eta_min, 1]^K in log space.

    The objective is sum_k [log Lambda_k(e^y) - nu_k . y], convex with a
    gradient made of convex-combination weights, so L-BFGS-B converges
    fast. Raises PowerOptError if the projected-gradient residual stays
    above residual_tol after a retry.
    """
    w, c, nu = condensed.num_w, condensed.num_c, condensed.nu
    nu_total = nu.sum(axis=0)
    lo = float(np.log(eta_min))

    def fg(y):
        eta = np.exp(y)
        lam = w @ eta + c
        f = float(np.log(lam).sum() - nu_total @ y)
        grad = (w / lam[:, None]).sum(axis=0) * eta - nu_total
        return f, grad

    y0 = np.log(np.clip(eta_start, eta_min, 1.0))
    bounds = [(lo, 0.0)] * y0.size
    res = scipy.optimize.minimize(
        fg, y0, jac=True, method="L-BFGS-B", bounds=bounds,
        options={"maxiter": maxiter, "ftol": 1e-15, "gtol": 1e-9})
    resid = _projected_residual(res.x, fg(res.x)[1], lo, 0.0)
    if resid > residual_tol:
        res = scipy.optimize.minimize(
            fg, res.x, jac=True, method="L-BFGS-B", bounds=bounds,
            options={"maxiter": 8 * maxiter, "ftol": 1e-16, "gtol": 1e-10})
        resid = _projected_residual(res.x, fg(res.x)[1], lo, 0.0)
        if resid > residual_tol:
            raise PowerOptError(
                f"condensed GP stalled with stationarity residual {resid:g}", [])
    return np.exp(res.x)


@dataclasses.dataclass(eq=False)
class ScaResult:
    eta: np.ndarray          # final coefficients, sub-floor values snapped to 0
    trace: np.ndarray        # objective after every round, starting value first
    objective: float
    iterations: int
    converged: bool
    tolerance: float


def sca_loop(problem, eta0=None, v=1e-4, eta_min=1e-6, max_iterations=100,
             gp_maxiter=500, residual_tol=1e-6):
    """Alternate condensation and convex solves until the objective settles.

    Stops when consecutive objective values differ by at most v. eta0
    defaults to full power; it must be strictly positive and at most 1.
    Returned eta snaps values below 2 * eta_min to exactly 0 (the floor is
    a solver artifact, not a transmit decision).
    """
    k_users = problem.num_users
    if eta0 is None:
        eta0 = np.ones(k_users)
    eta0 = np.asarray(eta0, dtype=float)
    if np.any(eta0 <= 0) or np.any(eta0 > 1):
        raise ValueError("eta0 must lie in (0, 1]")

    eta = np.clip(eta0, eta_min, 1.0)
    trace = [p3_objective(problem, eta)]
    converged = False
    if not problem.active.any():
        return ScaResult(eta=eta, trace=np.array(trace), objective=trace[0],
                         iterations=0, converged=True, tolerance=v)
    for _ in range(max_iterations):
        condensed = condense_problem(problem, eta)
        try:
            eta = solve_condensed_gp(condensed, eta, eta_min=eta_min,
                                     maxiter=gp_maxiter,
                                     residual_tol=residual_tol)
        except PowerOptError as err:
            raise PowerOptError(str(err), trace) from None
        trace.append(p3_objective(problem, eta))
        if abs(trace[-2] - trace[-1]) <= v:
            converged = True
            break
    eta_out = np.where(eta < 2 * eta_min, 0.0, eta)
    return ScaResult(eta=eta_out, trace=np.array(trace), objective=trace[-1],
                     iterations=len(trace) - 1, converged=converged,
                     tolerance=v)
