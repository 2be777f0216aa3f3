"""The three control laws as pure per-agent evaluations.

All operations here are side-effect free; the integrator owns every piece of
mutable state.  Consensus errors come in two flavors: the time-based law
reads live neighbour states, the event-based law only reads each agent's own
last successfully broadcast values.  Under an active attack (or after an
attacked broadcast attempt) the error terms are exactly zero vectors, never
merely small, so agents fall back to plain local gradient descent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .plant import AgentModel


@dataclass(frozen=True)
class AlgorithmParams:
    """Positive coupling gains of the optimization dynamics."""

    alpha: float = 2.0
    beta: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0.0 and self.beta > 0.0):
            raise ValidationError("alpha and beta must be positive")


@dataclass(frozen=True)
class TriggerParams:
    """Dynamic event-trigger coefficients.

    ``k_g > (1 - delta_g) / sigma_g`` (and the h-counterpart) keeps the
    combined Lyapunov decay rate of the auxiliary variables positive.
    ``dwell_kappa`` is the retry delay after an attempt that fell under
    attack.
    """

    sigma_g: float
    sigma_h: float
    theta_g: float
    theta_h: float
    delta_g: float
    delta_h: float
    k_g: float
    k_h: float
    eta_g0: float
    eta_h0: float
    dwell_kappa: float

    def __post_init__(self):
        if not (self.sigma_g > 0.0 and self.sigma_h > 0.0):
            raise ValidationError("sigma_g and sigma_h must be positive")
        for name in ("theta_g", "theta_h", "delta_g", "delta_h"):
            v = getattr(self, name)
            if not (0.0 <= v < 1.0):
                raise ValidationError(f"{name} must lie in [0, 1)")
        if not (self.k_g > 0.0 and self.k_h > 0.0):
            raise ValidationError("k_g and k_h must be positive")
        if not self.k_g > (1.0 - self.delta_g) / self.sigma_g:
            raise ValidationError("need k_g > (1 - delta_g) / sigma_g")
        if not self.k_h > (1.0 - self.delta_h) / self.sigma_h:
            raise ValidationError("need k_h > (1 - delta_h) / sigma_h")
        if not (self.eta_g0 > 0.0 and self.eta_h0 > 0.0):
            raise ValidationError("initial trigger variables must be positive")
        if not self.dwell_kappa > 0.0:
            raise ValidationError("dwell_kappa must be positive")


@dataclass
class AgentCtrlState:
    """Auxiliary optimization states of one agent."""

    rho: np.ndarray
    z: np.ndarray


@dataclass
class AgentTriggerState:
    """Event-trigger bookkeeping of one agent.

    ``last_broadcast`` holds the agent's own most recent successful
    (y, rho, z) broadcast and its timestamp; ``next_attempt`` is the retry
    time scheduled after an attacked attempt; ``governing_attacked`` is true
    while the most recent attempt fell under attack (errors are zeroed and
    the trigger variables are frozen until the next successful attempt).
    """

    eta_g: float
    eta_h: float
    y_hat: np.ndarray
    rho_hat: np.ndarray
    z_hat: np.ndarray
    last_time: float
    governing_attacked: bool = False
    next_attempt: float = math.inf


def consensus_errors_timebased(i: int, rho: np.ndarray, z: np.ndarray,
                               y: np.ndarray, weights: np.ndarray,
                               attacked: bool):
    """Live consensus errors of agent ``i``; exact zeros while attacked.

    ``rho``, ``z``, ``y`` stack all agents' values as rows (shape (N, q));
    ``weights`` is the active graph's adjacency.
    """
    q = rho.shape[1]
    if attacked:
        zero = np.zeros(q)
        return zero, zero.copy()
    a_row = weights[i]
    s = rho + z
    e_rho_z = a_row @ (s[i] - s)
    e_y = a_row @ (y[i] - y)
    return e_rho_z, e_y


def consensus_errors_eventbased(i: int, rho_hat: np.ndarray, z_hat: np.ndarray,
                                y_hat: np.ndarray, weights: np.ndarray,
                                last_attempt_attacked: bool):
    """Broadcast-table consensus errors of agent ``i``.

    Every hat value is the owner's last successful broadcast.  When agent
    ``i``'s own governing attempt was attacked the errors are exact zeros.
    """
    q = rho_hat.shape[1]
    if last_attempt_attacked:
        zero = np.zeros(q)
        return zero, zero.copy()
    a_row = weights[i]
    s = rho_hat + z_hat
    e_rho_z = a_row @ (s[i] - s)
    e_y = a_row @ (y_hat[i] - y_hat)
    return e_rho_z, e_y


def ctrl_derivative_timebased(i: int, x_i: np.ndarray, ctrl: AgentCtrlState,
                              errors, grad: np.ndarray,
                              params: AlgorithmParams, model: AgentModel):
    """Input and auxiliary-state derivatives of one agent.

    Returns ``(u_i, d_rho, d_z)`` where the intermediate variable is
    ``theta = -grad - beta * e_rho_z - alpha*beta * e_y``; ``d_rho`` equals
    theta and ``d_z = alpha*beta * e_y``.
    """
    e_rho_z, e_y = errors
    ab = params.alpha * params.beta
    theta = -np.asarray(grad, dtype=float) - params.beta * e_rho_z - ab * e_y
    u = (-model.K @ np.asarray(x_i, dtype=float)
         - (model.U - model.K @ model.X) @ ctrl.rho
         + model.W @ theta)
    return u, theta, ab * e_y


def measurement_errors(trig: AgentTriggerState, y_i: np.ndarray,
                       rho_i: np.ndarray, z_i: np.ndarray):
    """Drift of the current state away from the agent's own last broadcast."""
    e_y = trig.y_hat - y_i
    e_rho_z = (trig.rho_hat + trig.z_hat) - (rho_i + z_i)
    return e_y, e_rho_z


def trigger_functions(trig: AgentTriggerState, y_i, rho_i, z_i, errors,
                      params: TriggerParams):
    """The scalar trigger functions ``g`` and ``h``.

    ``g`` compares the squared broadcast drift of y against a fraction of the
    squared consensus error; ``h`` does the same for rho + z.  Both squared
    sizes are Euclidean, which reduces to the plain square for q = 1.
    """
    e_bar_rho_z, e_bar_y = errors
    me_y, me_rho_z = measurement_errors(trig, y_i, rho_i, z_i)
    g = float(me_y @ me_y) - params.theta_g * float(e_bar_y @ e_bar_y)
    h = float(me_rho_z @ me_rho_z) - params.theta_h * float(e_bar_rho_z @ e_bar_rho_z)
    return g, h


def trigger_check(i: int, current, trig: AgentTriggerState, errors,
                  params: TriggerParams) -> bool:
    """Whether agent ``i`` should attempt a new broadcast now.

    Fires when the scaled trigger condition is violated, i.e. when
    ``sigma_g * g > eta_g`` or ``sigma_h * h > eta_h``.  Immediately after a
    successful broadcast both drifts are zero and the auxiliary variables are
    positive, so this never fires.
    """
    y_i, rho_i, z_i = current
    g, h = trigger_functions(trig, y_i, rho_i, z_i, errors, params)
    return (params.sigma_g * g > trig.eta_g) or (params.sigma_h * h > trig.eta_h)


def eta_derivative(trig: AgentTriggerState, g: float, h: float,
                   params: TriggerParams, last_attempt_attacked: bool):
    """Derivatives of the auxiliary trigger variables; frozen under attack."""
    if last_attempt_attacked:
        return 0.0, 0.0
    d_g = -params.k_g * trig.eta_g - params.delta_g * g
    d_h = -params.k_h * trig.eta_h - params.delta_h * h
    return d_g, d_h


def schedule_after_attacked_attempt(t_attempt: float,
                                    params: TriggerParams) -> float:
    """Retry time after an attempt that landed during an attack."""
    return t_attempt + params.dwell_kappa
