"""Training of the warp parameters by Adam on the trace loss.

The loss is the trace of the projected Hamiltonian, i.e. the sum of the N
projected eigenvalues, computed without any eigendecomposition:

    L = sum_q w~_q [ 1/2 (S2 - S1 r + S0 r^2 / 4) / G'^2 + S0 V(G) ](x_q),

with r = G''/G' and the parameter-independent node profiles
S0 = sum_n phi_n^2, S1 = sum_n phi_n phi_n', S2 = sum_n phi_n'^2.  The sum
of Ritz values bounds the sum of true eigenvalues from above, so driving the
trace down tightens every level at once.

Training starts from the exact identity warp (see `flow.init_flow_params`),
so the iteration-0 loss reproduces the plain Hermite trace, and re-projects
the weights onto the Lip < 1 constraint set after every step.  Runs are
deterministic for a fixed seed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .autodiff import gradient
from .flow import FlowParams, _map_jets, init_flow_params, normalize_block
from .galerkin import Potential
from .hermite import eval_hermite_derivatives, eval_hermite_functions
from .quadrature import QuadratureRule, gauss_hermite_rule

__all__ = [
    "TrainingConfig",
    "AdamState",
    "TrainingTrace",
    "TrainingAborted",
    "make_trace_loss",
    "trace_loss",
    "adam_step",
    "train",
]


class TrainingAborted(RuntimeError):
    """Loss became non-finite; carries the trace collected so far."""

    def __init__(self, message, trace, params):
        super().__init__(message)
        self.trace = trace
        self.params = params


@dataclass(frozen=True)
class TrainingConfig:
    """Hyperparameters of one training run."""

    N: int
    Q: int = 90
    hidden: int = 128
    blocks: int = 1
    learning_rate: float = 1e-3
    iterations: int | None = None  # None -> 500 for N <= 9, else 2000
    seed: int = 0
    lipschitz_margin: float = 0.97

    def __post_init__(self):
        if self.N < 1 or self.Q < 1 or self.hidden < 1 or self.blocks < 1:
            raise ValueError("N, Q, hidden and blocks must all be positive")
        if self.learning_rate <= 0:
            raise ValueError(f"learning rate must be positive, got {self.learning_rate}")
        if self.iterations is not None and self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")

    @property
    def resolved_iterations(self) -> int:
        if self.iterations is not None:
            return self.iterations
        return 500 if self.N <= 9 else 2000


@dataclass
class AdamState:
    """First/second moment accumulators with bias-correction step count."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def init(cls, n_params: int) -> "AdamState":
        return cls(m=np.zeros(n_params), v=np.zeros(n_params))


@dataclass
class TrainingTrace:
    """Per-iteration loss, gradient norm and wall time (ms)."""

    losses: np.ndarray = field(default_factory=lambda: np.empty(0))
    grad_norms: np.ndarray = field(default_factory=lambda: np.empty(0))
    wall_ms: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __len__(self):
        return self.losses.size

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# hermflow trace csv v1\n")
            fh.write("iteration,loss,grad_norm,wall_ms\n")
            for i, (lo, gn, wm) in enumerate(zip(self.losses, self.grad_norms, self.wall_ms)):
                fh.write(f"{i},{float(lo)!r},{float(gn)!r},{float(wm)!r}\n")


def make_trace_loss(N: int, rule: QuadratureRule, V: Potential):
    """Closure computing the trace loss from a params-like object.

    The returned callable accepts a plain `FlowParams`, a taped view of one,
    or None (identity warp), so the same code serves evaluation, reverse-mode
    differentiation and finite-difference checks.
    """
    x = rule.nodes
    w = rule.lifted_weights
    phi = eval_hermite_functions(N - 1, x)
    dphi = eval_hermite_derivatives(N - 1, x)
    s0 = (phi * phi).sum(axis=0)
    s1 = (phi * dphi).sum(axis=0)
    s2 = (dphi * dphi).sum(axis=0)

    def loss(params):
        if params is None:
            g, g1, g2 = x, np.ones_like(x), np.zeros_like(x)
        else:
            g, g1, g2 = _map_jets(params, x)
        r = g2 / g1
        kinetic = 0.5 * (s2 - s1 * r + 0.25 * s0 * (r * r)) / (g1 * g1)
        per_node = kinetic + s0 * V(g)
        return (per_node * w).sum()

    return loss


def trace_loss(config: TrainingConfig, params: FlowParams | None, V: Potential) -> float:
    """Trace of the projected Hamiltonian for the given warp parameters."""
    rule = gauss_hermite_rule(config.Q)
    return float(make_trace_loss(config.N, rule, V)(params))


def adam_step(
    state: AdamState,
    grad: np.ndarray,
    params: FlowParams,
    lr: float,
) -> tuple[AdamState, FlowParams]:
    """One bias-corrected Adam update over every parameter (weights, alpha, beta).

    The updated weights are re-projected onto the Lip <= margin constraint
    set (spectral re-normalization) before being returned.
    """
    grad = np.asarray(grad, dtype=float)
    if grad.shape != state.m.shape:
        raise ValueError(f"gradient shape {grad.shape} does not match state {state.m.shape}")
    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    theta = params.pack() - lr * m_hat / (np.sqrt(v_hat) + state.eps)
    new_params = params.with_vector(theta)
    new_params.blocks = [normalize_block(b, params.lipschitz_margin) for b in new_params.blocks]
    new_state = AdamState(m=m, v=v, t=t, beta1=state.beta1, beta2=state.beta2, eps=state.eps)
    return new_state, new_params


def train(config: TrainingConfig, V: Potential) -> tuple[FlowParams, TrainingTrace]:
    """Optimize the warp for `config.resolved_iterations` Adam steps.

    The loss is recorded at the start of every iteration, so the first entry
    equals the plain Hermite trace (identity initialization).  Raises
    `TrainingAborted` with the partial trace if the loss turns non-finite.
    """
    rule = gauss_hermite_rule(config.Q)
    params = init_flow_params(
        hidden=config.hidden,
        n_blocks=config.blocks,
        lipschitz_margin=config.lipschitz_margin,
        alpha=1.05 * float(np.abs(rule.nodes).max()),
        beta=0.0,
        seed=config.seed,
    )
    loss_fn = make_trace_loss(config.N, rule, V)
    state = AdamState.init(params.n_parameters)
    losses, grad_norms, wall_ms = [], [], []
    for _ in range(config.resolved_iterations):
        tick = time.perf_counter()
        try:
            value, grad = gradient(loss_fn, params)
        except FloatingPointError as exc:
            trace = TrainingTrace(np.array(losses), np.array(grad_norms), np.array(wall_ms))
            raise TrainingAborted(f"training aborted: {exc}", trace, params) from exc
        state, params = adam_step(state, grad, params, config.learning_rate)
        losses.append(value)
        grad_norms.append(float(np.linalg.norm(grad)))
        wall_ms.append((time.perf_counter() - tick) * 1e3)
    trace = TrainingTrace(np.array(losses), np.array(grad_norms), np.array(wall_ms))
    return params, trace
