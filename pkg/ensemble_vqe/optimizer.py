"""
Gradients and L-BFGS minimisation of the ensemble cost.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Deque, List, Optional, Protocol, Sequence, Tuple, Union

import numpy as np

from .ansatz import RotationStep, apply_step
from .ensemble import EnsembleEvaluation, EnsembleProblem, evaluate
from .exceptions import DimensionError, NumericalError, ValidationError
from .models.optimizer import InitialParameters, OptimizerConfig

logger = logging.getLogger(__name__)

CURVATURE_THRESHOLD = 1e-12
FINITE_DIFFERENCE_STEP = 1e-6


class TerminationStatus(str, Enum):
    GRADIENT_CONVERGED = "gradient-converged"
    MAX_ITERATIONS = "max-iterations"
    LINE_SEARCH_FAILURE = "line-search-failure"


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    cost: float
    trace: float
    per_state_energies: Tuple[float, ...]
    gradient_norm: float


@dataclass
class ConvergenceRecord:
    """Accepted iterates of one minimisation, starting with the initial point"""
    iterations: List[IterationRecord] = field(default_factory=list)
    status: Optional[TerminationStatus] = None

    def append(self, evaluation: EnsembleEvaluation, gradient_norm: float) -> IterationRecord:
        if self.status is not None:
            raise ValidationError("Cannot extend a finished convergence record")
        entry = IterationRecord(
            iteration=len(self.iterations),
            cost=float(evaluation.cost),
            trace=float(evaluation.trace),
            per_state_energies=tuple(float(e) for e in evaluation.per_state_energies),
            gradient_norm=float(gradient_norm),
        )
        self.iterations.append(entry)
        return entry

    def finish(self, status: TerminationStatus) -> None:
        if self.status is not None:
            raise ValidationError(f"Termination status already set to {self.status.value}")
        self.status = TerminationStatus(status)

    @property
    def iteration_count(self) -> int:
        """Accepted steps (the initial point is iteration 0)"""
        return max(len(self.iterations) - 1, 0)

    @property
    def final(self) -> IterationRecord:
        if not self.iterations:
            raise ValidationError("Empty convergence record")
        return self.iterations[-1]

    @property
    def converged(self) -> bool:
        return self.status == TerminationStatus.GRADIENT_CONVERGED

    def swap_events(self) -> List[int]:
        """Iterations t at which the energy ordering of the states differs from t - 1"""
        events = []
        previous = None
        for entry in self.iterations:
            order = tuple(np.argsort(entry.per_state_energies, kind="stable"))
            if previous is not None and order != previous:
                events.append(entry.iteration)
            previous = order
        return events


class Objective(Protocol):
    parameter_count: int

    def evaluate(self, params: np.ndarray) -> EnsembleEvaluation:
        ...

    def gradient(self, params: np.ndarray) -> np.ndarray:
        ...


class EnsembleObjective:
    """Ensemble cost with its adjoint gradient"""

    def __init__(self, problem: EnsembleProblem):
        self.problem = problem
        self.parameter_count = problem.parameter_count

    def evaluate(self, params: np.ndarray) -> EnsembleEvaluation:
        return evaluate(self.problem, params)

    def gradient(self, params: np.ndarray) -> np.ndarray:
        return gradient(self.problem, params)


# ============================================
# Gradients
# ============================================

def gradient(problem: EnsembleProblem, params: Sequence[float]) -> np.ndarray:
    """
    Exact d(cost)/d(theta) by one backward sweep over the circuit

    With lam = W (H + mu S^2) psi_final carried back through the inverse gates,
    the step exp(-i theta c P) contributes 2 Re <lam| -i c P |psi> = 2 c Im <lam|P psi>.
    """
    circuit = problem.circuit
    theta = circuit.check_parameters(params)
    psi = problem.final_states(theta)
    lam = problem.effective_operator.apply(psi) * problem.weights.as_array()[None, :]
    grad = np.zeros(circuit.parameter_count)
    for step in reversed(circuit.steps):
        if isinstance(step, RotationStep):
            grad[step.parameter] += 2.0 * step.coefficient * float(np.vdot(lam, step.word.apply(psi)).imag)
        psi = apply_step(psi, step, theta, inverse=True)
        lam = apply_step(lam, step, theta, inverse=True)
    return grad


def finite_difference_gradient(
    function: Callable[[np.ndarray], float],
    params: Sequence[float],
    step: float = FINITE_DIFFERENCE_STEP,
) -> np.ndarray:
    """Central differences of a scalar function"""
    x = np.asarray(params, dtype=float)
    grad = np.zeros(x.size)
    for k in range(x.size):
        shift = np.zeros(x.size)
        shift[k] = step
        grad[k] = (function(x + shift) - function(x - shift)) / (2.0 * step)
    return grad


# ============================================
# L-BFGS
# ============================================

def _two_loop(g: np.ndarray, s_hist: Deque[np.ndarray], y_hist: Deque[np.ndarray]) -> np.ndarray:
    """Inverse-Hessian approximation applied to g"""
    q = g.copy()
    alphas = []
    for s, y in zip(reversed(s_hist), reversed(y_hist)):
        rho = 1.0 / (y @ s)
        alpha = rho * (s @ q)
        q -= alpha * y
        alphas.append((rho, alpha))
    if s_hist:
        q *= (s_hist[-1] @ y_hist[-1]) / (y_hist[-1] @ y_hist[-1])
    for (s, y), (rho, alpha) in zip(zip(s_hist, y_hist), reversed(alphas)):
        beta = rho * (y @ q)
        q += s * (alpha - beta)
    return q


def _inf_norm(g: np.ndarray) -> float:
    return float(np.max(np.abs(g))) if g.size else 0.0


def initial_parameters(
    kind: Union[str, InitialParameters], count: int, seed: Optional[int] = None
) -> np.ndarray:
    kind = InitialParameters(kind)
    if kind == InitialParameters.ZEROS:
        return np.zeros(count)
    return np.random.default_rng(seed).uniform(-np.pi, np.pi, size=count)


def minimize(
    target: Union[EnsembleProblem, Objective],
    initial_params: Sequence[float],
    config: Optional[OptimizerConfig] = None,
) -> Tuple[np.ndarray, ConvergenceRecord]:
    """
    L-BFGS with Armijo backtracking

    Args:
        target: an EnsembleProblem or any object with evaluate/gradient
        initial_params: finite starting point
        config: optimizer settings (defaults when omitted)

    Returns:
        (final parameters, convergence record); the record's status tells
        whether the gradient tolerance was met
    """
    config = config or OptimizerConfig()
    objective = EnsembleObjective(target) if isinstance(target, EnsembleProblem) else target
    x = np.array(initial_params, dtype=float).reshape(-1)
    if x.size != objective.parameter_count:
        raise DimensionError(f"Expected {objective.parameter_count} parameters, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("Initial parameters must be finite")

    ls = config.line_search
    record = ConvergenceRecord()
    current = objective.evaluate(x)
    g = objective.gradient(x)
    record.append(current, _inf_norm(g))
    s_hist: Deque[np.ndarray] = deque(maxlen=config.memory)
    y_hist: Deque[np.ndarray] = deque(maxlen=config.memory)

    while True:
        if _inf_norm(g) <= config.gradient_tolerance:
            record.finish(TerminationStatus.GRADIENT_CONVERGED)
            break
        if record.iteration_count >= config.max_iterations:
            record.finish(TerminationStatus.MAX_ITERATIONS)
            break

        direction = -_two_loop(g, s_hist, y_hist)
        slope = float(g @ direction)
        if not slope < 0:
            s_hist.clear()
            y_hist.clear()
            direction = -g
            slope = -float(g @ g)

        accepted = None
        for attempt in range(2):
            step = ls.initial_step
            # floating-point slack on the sufficient-decrease test
            slack = 4.0 * np.finfo(float).eps * max(1.0, abs(current.cost))
            for _ in range(ls.max_backtracks):
                trial = x + step * direction
                candidate = objective.evaluate(trial)
                if candidate.cost <= current.cost + ls.c1 * step * slope + slack:
                    accepted = (trial, candidate)
                    break
                step *= ls.shrink
            if accepted is not None or not s_hist:
                break
            # retry once along steepest descent with a fresh history
            s_hist.clear()
            y_hist.clear()
            direction = -g
            slope = -float(g @ g)

        if accepted is None:
            logger.warning(
                "Line search failed after %d iterations (cost %.12g, |g| %.3e)",
                record.iteration_count, current.cost, _inf_norm(g),
            )
            record.finish(TerminationStatus.LINE_SEARCH_FAILURE)
            break

        trial, candidate = accepted
        g_new = objective.gradient(trial)
        if not np.all(np.isfinite(g_new)):
            raise NumericalError("Gradient became non-finite during minimisation")
        s = trial - x
        y = g_new - g
        if y @ s > CURVATURE_THRESHOLD:
            s_hist.append(s)
            y_hist.append(y)
        x, current, g = trial, candidate, g_new
        entry = record.append(current, _inf_norm(g))
        logger.debug(
            "iter %d cost %.12g trace %.12g |g| %.3e",
            entry.iteration, entry.cost, entry.trace, entry.gradient_norm,
        )

    logger.info(
        "Minimisation finished: %s after %d iterations, cost %.12g",
        record.status.value, record.iteration_count, current.cost,
    )
    return x, record
