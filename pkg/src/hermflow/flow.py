"""Trainable bijection warping the Hermite basis.

The map G is an affine-tanh sandwich around an invertible residual network:

    G(x) = tanh(F(atanh((x - beta)/alpha))) * alpha + beta,
    F    = (id + k_L) o ... o (id + k_1),

where each residual k is a one-hidden-layer network with Lipswish
activations and spectrally normalized weights so that Lip(k) <= c < 1.
That bound makes every residual stage a contraction, hence F (and G) is a
strictly increasing bijection of the interval (beta - alpha, beta + alpha)
onto itself, invertible by Banach fixed-point iteration.

Evaluation is written against duck-typed scalars, so the same code runs on
plain numpy values and on `autodiff.Var` nodes when a loss is being
differentiated.  First and second derivatives with respect to the input are
propagated alongside the value as order-2 jets; Galerkin assembly needs
G, G' and G'' at every quadrature node.

Warped-basis functions are recovered from the inverse map:

    phi_n^aug(x) = phi_n(G^-1(x)) / sqrt(G'(G^-1(x))),

which stays orthonormal for any parameter setting (a change of variables in
the overlap integral).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import autodiff as ad
from .autodiff import Var
from .hermite import eval_hermite_functions

__all__ = [
    "ResidualBlock",
    "FlowParams",
    "Jet2",
    "FlowNumericsError",
    "ConvergenceError",
    "lipswish",
    "lipswish_jet",
    "spectral_norm",
    "normalize_block",
    "flow_forward",
    "flow_jet",
    "flow_inverse",
    "evaluate_augmented_basis",
    "init_flow_params",
    "save_checkpoint",
    "load_checkpoint",
]

ATANH_CLIP = 1e-7  # guards the open endpoints of the sandwich interval

_CHECKPOINT_MAGIC = "hermflow-checkpoint"
_CHECKPOINT_VERSION = 1


class FlowNumericsError(RuntimeError):
    """Flow evaluation produced a non-finite value."""


class ConvergenceError(RuntimeError):
    """Fixed-point inversion did not reach the requested tolerance."""


@dataclass
class ResidualBlock:
    """Weights of one residual stage k(u) = W_out @ lipswish(W_in @ u + b_in) + b_out."""

    w_in: np.ndarray  # (h, 1)
    b_in: np.ndarray  # (h,)
    w_out: np.ndarray  # (1, h)
    b_out: float

    @property
    def hidden(self) -> int:
        return self.w_in.shape[0]


@dataclass
class FlowParams:
    """All trainable parameters of the bijection."""

    blocks: list
    alpha: float
    beta: float
    lipschitz_margin: float = 0.97

    def __post_init__(self):
        if isinstance(self.alpha, (int, float, np.floating)) and not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0.0 < self.lipschitz_margin < 1.0:
            raise ValueError(f"lipschitz_margin must lie in (0, 1), got {self.lipschitz_margin}")

    # Flat parameter order: per block w_in (row-major), b_in, w_out (row-major),
    # b_out; then alpha, beta.  Checkpoints, gradients and Adam all use it.

    @property
    def n_parameters(self) -> int:
        return sum(3 * b.hidden + 1 for b in self.blocks) + 2

    def pack(self) -> np.ndarray:
        pieces = []
        for b in self.blocks:
            pieces.extend([np.ravel(b.w_in), np.ravel(b.b_in), np.ravel(b.w_out), [b.b_out]])
        pieces.append([self.alpha, self.beta])
        return np.concatenate([np.asarray(p, dtype=float) for p in pieces])

    def with_vector(self, theta: np.ndarray) -> "FlowParams":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_parameters,):
            raise ValueError(f"expected {self.n_parameters} parameters, got shape {theta.shape}")
        blocks = []
        pos = 0
        for b in self.blocks:
            h = b.hidden
            w_in = theta[pos : pos + h].reshape(h, 1)
            b_in = theta[pos + h : pos + 2 * h].copy()
            w_out = theta[pos + 2 * h : pos + 3 * h].reshape(1, h)
            b_out = float(theta[pos + 3 * h])
            pos += 3 * h + 1
            blocks.append(ResidualBlock(w_in, b_in, w_out, b_out))
        return FlowParams(blocks, float(theta[pos]), float(theta[pos + 1]), self.lipschitz_margin)

    def taped(self):
        """View of these parameters with `Var` leaves, plus the leaf list."""
        leaves = []
        blocks = []
        for b in self.blocks:
            vs = [Var(b.w_in), Var(b.b_in), Var(b.w_out), Var(np.float64(b.b_out))]
            leaves.extend(vs)
            blocks.append(ResidualBlock(*vs))
        alpha, beta = Var(np.float64(self.alpha)), Var(np.float64(self.beta))
        leaves.extend([alpha, beta])
        view = FlowParams(blocks, alpha, beta, self.lipschitz_margin)
        return view, leaves


@dataclass
class Jet2:
    """Value and first two input-derivatives of a map at one point."""

    value: float
    d1: float
    d2: float


# ---------------------------------------------------------------------------
# activations and spectral normalization
# ---------------------------------------------------------------------------


def lipswish(x):
    """x * sigmoid(x) / 1.1; Lipschitz constant <= 1."""
    return x / (1.1 * (1.0 + np.exp(-x)))


def _sigmoid_jets(p0, p1, p2):
    s = 1.0 / (1.0 + ad.exp(-p0))
    sp = s * (1.0 - s)
    spp = sp * (1.0 - 2.0 * s)
    return s, sp * p1, spp * p1 * p1 + sp * p2


def _lipswish_jets(p0, p1, p2):
    s0, s1, s2 = _sigmoid_jets(p0, p1, p2)
    v = p0 * s0 / 1.1
    d1 = (p1 * s0 + p0 * s1) / 1.1
    d2 = (p2 * s0 + 2.0 * p1 * s1 + p0 * s2) / 1.1
    return v, d1, d2


def lipswish_jet(j: Jet2) -> Jet2:
    """Lipswish applied to a jet (value with d/dx and d2/dx2 attached)."""
    v, d1, d2 = _lipswish_jets(j.value, j.d1, j.d2)
    return Jet2(v, d1, d2)


def spectral_norm(W: np.ndarray, iters: int = 500, tol: float = 1e-12) -> float:
    """Largest singular value by power iteration on W^T W.

    Starts from the normalized all-ones vector for reproducibility; stops at
    relative tolerance `tol` or after `iters` rounds.  The rank-one layer
    matrices used by the flow converge in a single round; the generous
    default budget covers dense matrices with small spectral gaps too.  A
    zero matrix returns 0 (callers must guard before dividing).
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {W.shape}")
    v = np.full(W.shape[1], 1.0 / np.sqrt(W.shape[1]))
    sigma = 0.0
    for _ in range(iters):
        u = W @ v
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return 0.0
        v = W.T @ (u / nu)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return 0.0
        v /= nv
        if abs(nv - sigma) <= tol * nv:
            return float(nv)
        sigma = nv
    return float(sigma)


def _block_scales(block: ResidualBlock, c: float):
    """Detached factors bringing each weight matrix to spectral norm <= sqrt(c)."""
    target = np.sqrt(c)
    scales = []
    for w in (block.w_in, block.w_out):
        raw = w.value if isinstance(w, Var) else w
        sig = spectral_norm(raw)
        scales.append(1.0 if sig <= target else target / sig)
    return scales[0], scales[1]


def normalize_block(block: ResidualBlock, c: float) -> ResidualBlock:
    """Rescale the block's weight matrices so that Lip(k) <= c.

    Each matrix W becomes W * min(1, sqrt(c)/sigma_max(W)); with the Lipswish
    Lipschitz constant <= 1 the residual map then contracts by at least c.
    """
    if not 0.0 < c < 1.0:
        raise ValueError(f"contraction constant must lie in (0, 1), got {c}")
    s_in, s_out = _block_scales(block, c)
    return replace(block, w_in=block.w_in * s_in, w_out=block.w_out * s_out)


# ---------------------------------------------------------------------------
# the sandwich map and its jets
# ---------------------------------------------------------------------------


def _leaf(x):
    return x.reshape(-1) if isinstance(x, Var) else np.ravel(x)


def _residual_value(block: ResidualBlock, s_in: float, s_out: float, u):
    """k(u) on plain values; u is a scalar or 1-d array."""
    pre = (s_in * np.ravel(block.w_in))[:, None] * np.asarray(u)[None, :] + block.b_in[:, None]
    act = lipswish(pre)
    return (s_out * np.ravel(block.w_out)) @ act + block.b_out


def _residual_jets(block: ResidualBlock, s_in: float, s_out: float, z0, z1, z2):
    """Jets of k at z; works on Var and ndarray backends alike."""
    w_in = _leaf(block.w_in).reshape((-1, 1)) * s_in
    w_out = _leaf(block.w_out).reshape((-1, 1)) * s_out
    b_in = _leaf(block.b_in).reshape((-1, 1))
    pre0 = w_in * z0 + b_in
    pre1 = w_in * z1
    pre2 = w_in * z2
    a0, a1, a2 = _lipswish_jets(pre0, pre1, pre2)
    k0 = (w_out * a0).sum(axis=0) + block.b_out
    k1 = (w_out * a1).sum(axis=0)
    k2 = (w_out * a2).sum(axis=0)
    return k0, k1, k2


def _map_jets(params: FlowParams, x: np.ndarray):
    """(G(x), G'(x), G''(x)) at the given points, on either backend."""
    x = np.asarray(x, dtype=float)
    c = params.lipschitz_margin
    lo, hi = -1.0 + ATANH_CLIP, 1.0 - ATANH_CLIP
    raw = (x - params.beta) / params.alpha
    t0 = ad.clip(raw, lo, hi)
    raw_vals = raw.value if isinstance(raw, Var) else raw
    inside = ((raw_vals > lo) & (raw_vals < hi)).astype(float)
    t1 = inside / params.alpha
    # u = atanh(t)
    u0 = ad.atanh(t0)
    den = 1.0 - t0 * t0
    up = 1.0 / den
    z0, z1, z2 = u0, up * t1, (2.0 * t0 * up * up) * t1 * t1
    for block in params.blocks:
        s_in, s_out = _block_scales(block, c)
        k0, k1, k2 = _residual_jets(block, s_in, s_out, z0, z1, z2)
        z0, z1, z2 = z0 + k0, z1 + k1, z2 + k2
    g = ad.tanh(z0)
    gp = 1.0 - g * g
    gpp = -2.0 * g * gp
    d1 = gp * z1
    d2 = gpp * z1 * z1 + gp * z2
    return g * params.alpha + params.beta, d1 * params.alpha, d2 * params.alpha


def flow_forward(params: FlowParams, x):
    """G(x) for a scalar or array of points inside the sandwich interval."""
    scalar = np.isscalar(x) or np.ndim(x) == 0
    g, _, _ = _map_jets(params, np.atleast_1d(np.asarray(x, dtype=float)))
    if isinstance(g, Var):
        return g
    if not np.all(np.isfinite(g)):
        bad = np.atleast_1d(x)[~np.isfinite(g)][0]
        raise FlowNumericsError(f"flow evaluation produced a non-finite value at x={bad}")
    return float(g[0]) if scalar else g


def flow_jet(params: FlowParams, x) -> Jet2:
    """G, G' and G'' at x (scalar in, scalar jet out; arrays pass through)."""
    scalar = np.isscalar(x) or np.ndim(x) == 0
    g, d1, d2 = _map_jets(params, np.atleast_1d(np.asarray(x, dtype=float)))
    if isinstance(g, Var):
        return Jet2(g, d1, d2)
    stacked = np.stack([g, d1, d2])
    if not np.all(np.isfinite(stacked)):
        bad = np.atleast_1d(x)[~np.isfinite(stacked).all(axis=0)][0]
        raise FlowNumericsError(f"flow jet produced a non-finite value at x={bad}")
    if scalar:
        return Jet2(float(g[0]), float(d1[0]), float(d2[0]))
    return Jet2(g, d1, d2)


def flow_inverse(
    params: FlowParams,
    y,
    tol: float = 1e-12,
    max_iter: int = 10_000,
    return_iterations: bool = False,
):
    """G^{-1}(y) by unwrapping the sandwich and fixed-point iteration.

    The affine-tanh layers invert in closed form; each residual stage
    z + k(z) = w is solved by z_{t+1} = w - k(z_t), a contraction with rate
    at most the Lipschitz margin c.  Iteration stops once successive
    iterates differ by less than `tol`.  With `return_iterations` the total
    fixed-point iteration count comes back alongside the result.
    """
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    scalar = np.isscalar(y) or np.ndim(y) == 0
    y = np.atleast_1d(np.asarray(y, dtype=float))
    c = params.lipschitz_margin
    lo, hi = -1.0 + ATANH_CLIP, 1.0 - ATANH_CLIP
    w = np.arctanh(np.clip((y - params.beta) / params.alpha, lo, hi))
    total_iters = 0
    for block in reversed(params.blocks):
        s_in, s_out = _block_scales(block, c)
        z = w.copy()
        for _ in range(max_iter):
            z_next = w - _residual_value(block, s_in, s_out, z)
            total_iters += 1
            step = np.abs(z_next - z).max()
            z = z_next
            if step < tol:
                break
        else:
            raise ConvergenceError(
                f"fixed-point inversion stalled after {max_iter} iterations "
                f"(last step {step:.3e}, tol {tol:.1e})"
            )
        w = z
    x = np.tanh(w) * params.alpha + params.beta
    result = float(x[0]) if scalar else x
    return (result, total_iters) if return_iterations else result


def evaluate_augmented_basis(params: FlowParams, n_max: int, x) -> np.ndarray:
    """Warped-basis values phi_n(G^{-1}(x)) / sqrt(G'(G^{-1}(x))), n = 0..n_max."""
    y = flow_inverse(params, np.atleast_1d(np.asarray(x, dtype=float)))
    jets = flow_jet(params, y)
    vals = eval_hermite_functions(n_max, y) / np.sqrt(jets.d1)
    return vals[:, 0] if (np.isscalar(x) or np.ndim(x) == 0) else vals


# ---------------------------------------------------------------------------
# initialization and checkpoints
# ---------------------------------------------------------------------------


def init_flow_params(
    hidden: int = 128,
    n_blocks: int = 1,
    lipschitz_margin: float = 0.97,
    alpha: float = 1.0,
    beta: float = 0.0,
    seed: int = 0,
) -> FlowParams:
    """Near-identity starting point for training.

    Input weights are drawn uniformly from (-1e-2, 1e-2); output weights and
    all biases start at zero, so every residual vanishes and G is exactly the
    identity on its interval.  Epoch-0 results therefore coincide with the
    plain Hermite scheme.  `alpha` should cover the outermost quadrature node
    with some margin (the trainer uses 1.05 * max |x_q|).
    """
    rng = np.random.default_rng(seed)
    blocks = []
    for _ in range(n_blocks):
        w_in = rng.uniform(-1e-2, 1e-2, size=(hidden, 1))
        block = ResidualBlock(w_in, np.zeros(hidden), np.zeros((1, hidden)), 0.0)
        blocks.append(normalize_block(block, lipschitz_margin))
    return FlowParams(blocks, float(alpha), float(beta), lipschitz_margin)


def save_checkpoint(params: FlowParams, path, seed: int = 0) -> None:
    """Write a versioned text checkpoint (architecture, alpha/beta, flat weights)."""
    theta = params.pack()[:-2]  # block parameters only; alpha/beta are header fields
    hidden = params.blocks[0].hidden if params.blocks else 0
    lines = [
        f"{_CHECKPOINT_MAGIC} v{_CHECKPOINT_VERSION}",
        f"hidden = {hidden}",
        f"blocks = {len(params.blocks)}",
        f"lipschitz_margin = {float(params.lipschitz_margin)!r}",
        f"alpha = {float(params.alpha)!r}",
        f"beta = {float(params.beta)!r}",
        f"seed = {seed}",
        "params:",
    ]
    lines.extend(repr(float(v)) for v in theta)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_checkpoint(path) -> tuple[FlowParams, int]:
    """Read a checkpoint written by `save_checkpoint`; returns (params, seed)."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith(_CHECKPOINT_MAGIC):
        raise ValueError(f"{path}: not a flow checkpoint")
    if lines[0] != f"{_CHECKPOINT_MAGIC} v{_CHECKPOINT_VERSION}":
        raise ValueError(f"{path}: unsupported checkpoint version {lines[0]!r}")
    header = {}
    body_at = None
    for i, ln in enumerate(lines[1:], start=1):
        if ln == "params:":
            body_at = i + 1
            break
        key, _, val = ln.partition("=")
        header[key.strip()] = val.strip()
    if body_at is None:
        raise ValueError(f"{path}: missing parameter section")
    hidden = int(header["hidden"])
    n_blocks = int(header["blocks"])
    margin = float(header["lipschitz_margin"])
    alpha = float(header["alpha"])
    beta = float(header["beta"])
    seed = int(header["seed"])
    theta = np.array([float(v) for v in lines[body_at:]])
    if theta.size != n_blocks * (3 * hidden + 1):
        raise ValueError(f"{path}: expected {n_blocks * (3 * hidden + 1)} weights, got {theta.size}")
    template = FlowParams(
        [
            ResidualBlock(np.zeros((hidden, 1)), np.zeros(hidden), np.zeros((1, hidden)), 0.0)
            for _ in range(n_blocks)
        ],
        alpha,
        beta,
        margin,
    )
    return template.with_vector(np.concatenate([theta, [alpha, beta]])), seed
