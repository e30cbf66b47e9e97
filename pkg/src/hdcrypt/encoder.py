"""Hyperdimensional stochastic encoding: noisy projection + threshold.

Two interchangeable backends produce the pre-threshold vector y for an
input x of length k:

* a Crossbar, where y is one noisy analog read of x, and
* IdealEncoder, where y = (W + N) x with W fixed and N a fresh Gaussian
  matrix per pass.

Binarization compares y against a single global threshold `epsilon`;
entries >= epsilon map to 1. The threshold is calibrated per model as the
median of pre-threshold outputs over a calibration batch, which balances
the 0/1 bit budget of the ciphertext.

For IdealEncoder the fresh noise is sampled in its exact projected form:
since N has i.i.d. Normal(0, sigma^2) entries, N @ x is a vector of
independent Normal(0, sigma^2 * ||x||^2) draws, so we sample that
directly instead of materializing a D x k matrix per pass. The
materializing path is kept as `project_with_noise_matrix` for reference
and testing.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError
from .hypervector import BinaryHypervector
from .rng import spawn_rng

__all__ = [
    "threshold_binarize",
    "binarize_batch",
    "calibrate_epsilon",
    "encode_crossbar",
    "encode_crossbar_batch",
    "IdealEncoder",
    "EncoderParams",
]


def threshold_binarize(y, epsilon):
    """Bit i = 1 iff y[i] >= epsilon (ties map to 1)."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise DimensionError("expected a 1-D vector")
    if not np.all(np.isfinite(y)):
        raise ValueError("pre-threshold values must be finite")
    return BinaryHypervector.from_bits(y >= epsilon)


def binarize_batch(ys, epsilon):
    """Threshold a (n, D) batch into a uint8 bit matrix."""
    ys = np.asarray(ys, dtype=np.float64)
    if not np.all(np.isfinite(ys)):
        raise ValueError("pre-threshold values must be finite")
    return (ys >= epsilon).astype(np.uint8)


def calibrate_epsilon(pre_threshold, samples):
    """Median of all pre-threshold output entries across sample inputs.

    `pre_threshold` maps one input vector to its pre-threshold output;
    pass a closure binding the encoder and a random stream.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one calibration sample")
    outs = [np.asarray(pre_threshold(s), dtype=np.float64).ravel() for s in samples]
    return float(np.median(np.concatenate(outs)))


def crossbar_pre_threshold(xbar, x, rng):
    """Differential crossbar read: the raw column currents minus the
    current of an ideal reference column programmed to mid-range.

    All conductances are positive, so a raw read carries a common-mode
    term mean(G) * sum(x) shared by every column; inputs with a large
    entry sum would otherwise saturate the whole code word to all ones
    or all zeros. Sensing each column against a reference column at
    G_mid = (G_on + G_off) / 2 cancels that term exactly:
    y_j = sum_i x_i * (G_ij - G_mid).
    """
    return xbar.read_vmm(x, rng) - np.sum(x) * xbar.config.g_mid


def crossbar_pre_threshold_batch(xbar, xs, rng):
    xs = np.asarray(xs, dtype=np.float64)
    return xbar.read_vmm_batch(xs, rng) - xs.sum(axis=1, keepdims=True) * xbar.config.g_mid


def encode_crossbar(xbar, x, epsilon, rng):
    """One encryption pass of x: differential read, then threshold."""
    return threshold_binarize(crossbar_pre_threshold(xbar, x, rng), epsilon)


def encode_crossbar_batch(xbar, xs, epsilon, rng):
    """Encode each row of xs with fresh per-pass noise; returns (n, cols) bits."""
    return binarize_batch(crossbar_pre_threshold_batch(xbar, xs, rng), epsilon)


@dataclass(frozen=True)
class EncoderParams:
    """Dimensioning of an encoder: D = input_dim * multiplier."""

    input_dim: int
    multiplier: int
    epsilon: float = 0.0

    def __post_init__(self):
        if self.input_dim < 1:
            raise ConfigError("input_dim", "must be >= 1")
        if self.multiplier < 1:
            raise ConfigError("multiplier", "must be >= 1")

    @property
    def output_dim(self):
        return self.input_dim * self.multiplier


class IdealEncoder:
    """Fixed random projection plus fresh Gaussian matrix noise per pass."""

    __slots__ = ("weights", "sigma", "epsilon", "seed")

    def __init__(self, weights, sigma, epsilon, seed=0):
        weights = np.ascontiguousarray(weights, dtype=np.float64)
        if weights.ndim != 2:
            raise DimensionError("weights must be 2-D (output_dim x input_dim)")
        if sigma < 0:
            raise ConfigError("sigma", f"must be >= 0, got {sigma!r}")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "sigma", float(sigma))
        object.__setattr__(self, "epsilon", float(epsilon))
        object.__setattr__(self, "seed", int(seed))

    def __setattr__(self, name, value):
        raise AttributeError("IdealEncoder is immutable")

    @classmethod
    def new_random(cls, input_dim, multiplier, sigma, seed,
                   init_low=-2.0, init_high=2.0, epsilon=0.0):
        """Projection entries i.i.d. uniform in (init_low, init_high)."""
        if init_low >= init_high:
            raise ConfigError("init_low", "init interval must be nonempty")
        params = EncoderParams(input_dim, multiplier)
        rng = spawn_rng(seed, "ideal-encoder-init")
        w = rng.uniform(init_low, init_high, size=(params.output_dim, input_dim))
        return cls(w, sigma, epsilon, seed)

    @property
    def input_dim(self):
        return self.weights.shape[1]

    @property
    def output_dim(self):
        return self.weights.shape[0]

    def with_epsilon(self, epsilon):
        return IdealEncoder(self.weights, self.sigma, epsilon, self.seed)

    def _check_input(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.input_dim,):
            raise DimensionError(f"input shape {x.shape}, expected ({self.input_dim},)")
        if not np.all(np.isfinite(x)):
            raise ValueError("input vector must be finite")
        return x

    def project(self, x, rng):
        """Pre-threshold output (W + N) x for one fresh noise draw."""
        x = self._check_input(x)
        y = self.weights @ x
        if self.sigma > 0:
            y += self.sigma * np.linalg.norm(x) * rng.standard_normal(self.output_dim)
        return y

    def project_batch(self, xs, rng):
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim != 2 or xs.shape[1] != self.input_dim:
            raise DimensionError(f"input shape {xs.shape}, expected (n, {self.input_dim})")
        ys = xs @ self.weights.T
        if self.sigma > 0:
            scale = self.sigma * np.linalg.norm(xs, axis=1, keepdims=True)
            ys += scale * rng.standard_normal(ys.shape)
        return ys

    def project_with_noise_matrix(self, x, noise_matrix):
        """Reference path: y = (W + N) x with an explicit noise matrix N."""
        x = self._check_input(x)
        noise_matrix = np.asarray(noise_matrix, dtype=np.float64)
        if noise_matrix.shape != self.weights.shape:
            raise DimensionError(
                f"noise shape {noise_matrix.shape}, expected {self.weights.shape}"
            )
        return (self.weights + noise_matrix) @ x

    def encode(self, x, rng):
        return threshold_binarize(self.project(x, rng), self.epsilon)

    def encode_batch(self, xs, rng):
        return binarize_batch(self.project_batch(xs, rng), self.epsilon)


def project_streamed(x, output_dim, sigma, seed, rng,
                     init_low=-2.0, init_high=2.0, block_rows=4096):
    """Pre-threshold output of an IdealEncoder too large to materialize.

    Regenerates the projection block by block from the same seeded stream
    new_random would use, so the result matches an in-memory encoder with
    identical parameters; memory stays O(block_rows * len(x)).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise DimensionError("expected a nonempty 1-D input")
    if not np.all(np.isfinite(x)):
        raise ValueError("input vector must be finite")
    w_rng = spawn_rng(seed, "ideal-encoder-init")
    y = np.empty(output_dim)
    for start in range(0, output_dim, block_rows):
        rows = min(block_rows, output_dim - start)
        block = w_rng.uniform(init_low, init_high, size=(rows, x.size))
        y[start:start + rows] = block @ x
    if sigma > 0:
        y += sigma * np.linalg.norm(x) * rng.standard_normal(output_dim)
    return y
