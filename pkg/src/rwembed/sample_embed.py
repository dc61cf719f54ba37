"""Sampling-based embeddings trained by maximizing the negative-sampling likelihood.

Two conditional probability models are supported: the sigmoid of the dot
product (whose optimum is shifted PMI) and the piecewise-linear model whose
optimum at full rank is the autocovariance.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import _kernels_py
from .factorize import Embedding
from .kernels import AUTOCOV_PIECEWISE, PMI_SIGMOID, get_backend
from .process import Corpus

logger = logging.getLogger(__name__)

RHO_EPS = 1e-12
VARIANTS = {"pmi_sigmoid": PMI_SIGMOID, "autocov_piecewise": AUTOCOV_PIECEWISE}


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainerConfig:
    dim: int = 128
    negatives: int = 5
    epochs: int = 400
    batch_size: int = 1000  # walks per batch
    lr: float = 0.01
    lr_schedule: str = "linear"  # "linear" decays to lr * min_lr_ratio, "constant" keeps lr
    min_lr_ratio: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1 or self.negatives < 1 or self.epochs < 1 or self.batch_size < 1:
            raise ValueError("dim, negatives, epochs and batch_size must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.lr_schedule not in ("linear", "constant"):
            raise ValueError(f"unknown lr_schedule {self.lr_schedule!r}")
        if not 0 < self.min_lr_ratio <= 1:
            raise ValueError("min_lr_ratio must be in (0, 1]")


def rho(x):
    """Piecewise-linear activation: clamp to ``[0, 1]``."""
    return np.clip(x, 0.0, 1.0)


def pmi_pair_objective(dot: float) -> tuple[float, float]:
    """``(log sigma(dot), log sigma(-dot))``, stable for large ``|dot|``."""
    pos, neg, _, _ = _kernels_py.pair_terms(np.float64(dot), 0.0, 1, PMI_SIGMOID, RHO_EPS)
    return float(pos), float(neg)


def autocov_pair_objective(dot: float, pi_u: float, pi_v: float, b: int) -> tuple[float, float]:
    """Log of the piecewise-linear conditional probabilities.

    ``pos = log rho((x + a) / (x + (b+1) a))`` and
    ``neg = log rho(a / (x + (b+1) a))`` with ``a = pi_u * pi_v``; the
    arguments are clamped to ``[1e-12, 1]`` before the logarithm.
    """
    if pi_u <= 0 or pi_v <= 0:
        raise ValueError("stationary probabilities must be positive")
    pos, neg, _, _ = _kernels_py.pair_terms(np.float64(dot), pi_u * pi_v, b, AUTOCOV_PIECEWISE, RHO_EPS)
    return float(pos), float(neg)


def pair_objective_grad(variant: str, dot, pi_u=1.0, pi_v=1.0, b: int = 1):
    """Derivatives of ``(pos, neg)`` with respect to the dot product."""
    _, _, dpos, dneg = _kernels_py.pair_terms(np.asarray(dot, dtype=np.float64), pi_u * pi_v, b, VARIANTS[variant], RHO_EPS)
    return dpos, dneg


def fixed_point_autocov(pi: np.ndarray, Mt: np.ndarray) -> np.ndarray:
    """Stationary point of the piecewise-linear likelihood at full rank.

    Setting the derivative of the per-pair likelihood to zero gives
    ``u_u^T v_v = pi_u [M^tau]_uv - pi_u pi_v`` for observed pairs; the
    number of negatives cancels out.
    """
    return pi[:, None] * Mt - np.outer(pi, pi)


class AliasTable:
    """Vose alias table for O(1) sampling from a discrete distribution."""

    def __init__(self, probs):
        p = np.asarray(probs, dtype=np.float64)
        if np.any(p < 0) or p.sum() <= 0:
            raise ValueError("probabilities must be nonnegative with positive sum")
        n = len(p)
        scaled = p / p.sum() * n
        prob = np.ones(n)
        alias = np.arange(n)
        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        while small and large:
            s, l = small.pop(), large.pop()
            prob[s] = scaled[s]
            alias[s] = l
            scaled[l] = scaled[l] + scaled[s] - 1.0
            (small if scaled[l] < 1.0 else large).append(l)
        for i in small + large:
            prob[i] = 1.0
        self.prob = prob
        self.alias = alias

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        idx = rng.integers(0, len(self.prob), size=size)
        flip = rng.random(size) >= self.prob[idx]
        return np.where(flip, self.alias[idx], idx).astype(np.int64)


def _rate(cfg: TrainerConfig, step: int, total: int) -> float:
    if cfg.lr_schedule == "constant":
        return cfg.lr
    return cfg.lr * max(1.0 - step / total, cfg.min_lr_ratio)


class _Adam:
    def __init__(self, shapes, cfg: TrainerConfig):
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.t = 0
        self.cfg = cfg

    def step(self, params, grads, lr):
        c = self.cfg
        self.t += 1
        bc1 = 1.0 - c.beta1**self.t
        bc2 = 1.0 - c.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= c.beta1
            m += (1.0 - c.beta1) * g
            v *= c.beta2
            v += (1.0 - c.beta2) * g * g
            p -= lr * (m / bc1) / (np.sqrt(v / bc2) + c.adam_eps)


@dataclass
class TrainResult:
    embedding: Embedding
    losses: list[float]

    def trailing_average_nonincreasing(self, window: int = 20, slack: float = 1e-3) -> bool:
        """True if the trailing-window mean loss never rises by more than ``slack`` (relative)."""
        L = np.asarray(self.losses)
        if len(L) < window + 1:
            return True
        avg = np.convolve(L, np.ones(window) / window, mode="valid")
        return bool(np.all(np.diff(avg) <= slack * np.abs(avg[:-1])))


def train(
    corpus: Corpus,
    pi: np.ndarray,
    cfg: TrainerConfig,
    variant: str = "autocov_piecewise",
    backend: str | None = None,
    init: tuple[np.ndarray, np.ndarray] | None = None,
) -> TrainResult:
    """Fit source/target embeddings ``U, V`` to a walk corpus.

    Each epoch visits the walks in random order, ``cfg.batch_size`` walks
    per batch; every positive pair ``(u, v)`` is contrasted with
    ``cfg.negatives`` targets drawn from ``pi``. Parameters follow Adam on
    the batch-mean negative log-likelihood.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {sorted(VARIANTS)}")
    if len(corpus) == 0:
        raise ValueError("empty corpus")
    pi = np.ascontiguousarray(pi, dtype=np.float64)
    if pi.shape != (corpus.n,) or np.any(pi <= 0):
        raise ValueError("pi must be a strictly positive vector with one entry per node")
    kern = get_backend(backend)
    code = VARIANTS[variant]
    n, d, b = corpus.n, cfg.dim, cfg.negatives

    init_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0]))
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
    if init is None:
        U = init_rng.uniform(-0.5 / d, 0.5 / d, size=(n, d))
        V = init_rng.uniform(-0.5 / d, 0.5 / d, size=(n, d))
    else:
        U, V = (np.array(x, dtype=np.float64, order="C") for x in init)
    alias = AliasTable(pi)
    opt = _Adam([U.shape, V.shape], cfg)
    gU = np.zeros_like(U)
    gV = np.zeros_like(V)

    ppw = corpus.pairs_per_walk
    src_w = corpus.src.reshape(-1, ppw)
    dst_w = corpus.dst.reshape(-1, ppw)
    n_walks = src_w.shape[0]
    n_batches = -(-n_walks // cfg.batch_size)
    total_steps = cfg.epochs * n_batches
    losses = []
    step = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(n_walks)
        total = 0.0
        for bi, lo in enumerate(range(0, n_walks, cfg.batch_size)):
            sel = order[lo:lo + cfg.batch_size]
            src = np.ascontiguousarray(src_w[sel].ravel())
            dst = np.ascontiguousarray(dst_w[sel].ravel())
            negs = alias.sample(rng, (len(src), b))
            gU.fill(0.0)
            gV.fill(0.0)
            loss = kern.batch_grad(U, V, src, dst, negs, pi, code, b, RHO_EPS, gU, gV)
            if not math.isfinite(loss):
                raise TrainingDiverged(f"loss became {loss} at epoch {epoch}, batch {bi}")
            total += loss
            scale = 1.0 / len(src)
            gU *= scale
            gV *= scale
            opt.step([U, V], [gU, gV], _rate(cfg, step, total_steps))
            step += 1
        losses.append(total / len(corpus))
        if epoch % 50 == 0:
            logger.debug("epoch %d loss %.6f", epoch, losses[-1])
    prov = {
        "algorithm": "sample",
        "variant": variant,
        "similarity": "pmi" if code == PMI_SIGMOID else "autocovariance",
        "tau": corpus.tau,
        "d": d,
        "trainer": asdict(cfg),
    }
    return TrainResult(Embedding(U, V, prov), losses)
