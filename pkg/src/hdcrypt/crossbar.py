"""Memristor crossbar simulator.

Models an analog vector-matrix multiply I = V @ G with three programmable
non-idealities: a bounded conductance range [G_off, G_on] (from the high
and low resistance states), per-read additive Gaussian variability on
every free cell, and cells permanently stuck at either rail.

The noise convention follows hardware practice: each read perturbs each
free cell by Normal(0, sigma_frac * (G_on - G_off)) and the result is
clamped back into [G_off, G_on], because a physical device cannot leave
its rail range. Stuck cells never move.

A crossbar is immutable after construction, so instances can be shared
freely; every read takes its random stream as an explicit argument.
"""

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError, DataFormatError, DimensionError
from .rng import spawn_rng

__all__ = ["CrossbarConfig", "Crossbar", "STUCK_FREE", "STUCK_ON", "STUCK_OFF"]

STUCK_FREE = 0
STUCK_ON = 1
STUCK_OFF = 2

_STUCK_TO_CODE = {STUCK_FREE: "F", STUCK_ON: "N", STUCK_OFF: "P"}
_CODE_TO_STUCK = {v: k for k, v in _STUCK_TO_CODE.items()}

# Per-sample noise matrices for batched reads are generated in slices no
# larger than this many float64 values.
_BATCH_BUDGET = 8_000_000


@dataclass(frozen=True)
class CrossbarConfig:
    """Geometry, resistance range, and non-ideality parameters.

    rows: word-line (input) count, cols: bit-line (output) count.
    r_lrs / r_hrs: low / high resistance states in ohms; the realizable
    conductance range is [1/r_hrs, 1/r_lrs].
    sigma_frac: per-read Gaussian std as a fraction of that range.
    p_stuck_on / p_stuck_off: per-cell probabilities of being pinned at
    G_on / G_off for the lifetime of the array.
    """

    rows: int
    cols: int
    r_lrs: float
    r_hrs: float
    sigma_frac: float
    p_stuck_on: float
    p_stuck_off: float
    seed: int

    def __post_init__(self):
        if not (isinstance(self.rows, (int, np.integer)) and self.rows > 0):
            raise ConfigError("rows", f"must be a positive integer, got {self.rows!r}")
        if not (isinstance(self.cols, (int, np.integer)) and self.cols > 0):
            raise ConfigError("cols", f"must be a positive integer, got {self.cols!r}")
        if not (0 < self.r_lrs < self.r_hrs):
            raise ConfigError(
                "r_lrs", f"need 0 < r_lrs < r_hrs, got r_lrs={self.r_lrs!r} r_hrs={self.r_hrs!r}"
            )
        if self.sigma_frac < 0:
            raise ConfigError("sigma_frac", f"must be >= 0, got {self.sigma_frac!r}")
        if self.p_stuck_on < 0:
            raise ConfigError("p_stuck_on", f"must be >= 0, got {self.p_stuck_on!r}")
        if self.p_stuck_off < 0:
            raise ConfigError("p_stuck_off", f"must be >= 0, got {self.p_stuck_off!r}")
        if self.p_stuck_on + self.p_stuck_off > 1:
            raise ConfigError("p_stuck_on", "p_stuck_on + p_stuck_off must be <= 1")

    @property
    def g_on(self):
        return 1.0 / self.r_lrs

    @property
    def g_off(self):
        return 1.0 / self.r_hrs

    @property
    def g_range(self):
        return self.g_on - self.g_off

    @property
    def g_mid(self):
        return 0.5 * (self.g_on + self.g_off)

    @property
    def noise_std(self):
        return self.sigma_frac * self.g_range


class Crossbar:
    """An instantiated array: target conductances plus a stuck-cell mask."""

    __slots__ = ("config", "g_target", "stuck_mask")

    def __init__(self, config, g_target, stuck_mask):
        shape = (config.rows, config.cols)
        g_target = np.ascontiguousarray(g_target, dtype=np.float64)
        stuck_mask = np.ascontiguousarray(stuck_mask, dtype=np.int8)
        if g_target.shape != shape:
            raise DimensionError(f"g_target shape {g_target.shape}, expected {shape}")
        if stuck_mask.shape != shape:
            raise DimensionError(f"stuck_mask shape {stuck_mask.shape}, expected {shape}")
        if g_target.min() < config.g_off - 1e-18 or g_target.max() > config.g_on + 1e-18:
            raise ConfigError("g_target", "conductances must lie in [G_off, G_on]")
        if not np.all(g_target[stuck_mask == STUCK_ON] == config.g_on):
            raise ConfigError("g_target", "stuck-on cells must sit at G_on")
        if not np.all(g_target[stuck_mask == STUCK_OFF] == config.g_off):
            raise ConfigError("g_target", "stuck-off cells must sit at G_off")
        g_target.setflags(write=False)
        stuck_mask.setflags(write=False)
        object.__setattr__(self, "config", config)
        object.__setattr__(self, "g_target", g_target)
        object.__setattr__(self, "stuck_mask", stuck_mask)

    def __setattr__(self, name, value):
        raise AttributeError("Crossbar is immutable")

    @classmethod
    def new_random(cls, config):
        """Build an untuned array from the config's seed.

        Conductances are i.i.d. uniform over [G_off, G_on]; each cell is
        independently stuck-on / stuck-off / free; stuck cells are pinned
        to their rail. Deterministic given config.seed.
        """
        rng = spawn_rng(config.seed, "crossbar-construct")
        shape = (config.rows, config.cols)
        g = rng.uniform(config.g_off, config.g_on, size=shape)
        u = rng.random(size=shape)
        mask = np.full(shape, STUCK_FREE, dtype=np.int8)
        mask[u < config.p_stuck_on] = STUCK_ON
        mask[(u >= config.p_stuck_on) & (u < config.p_stuck_on + config.p_stuck_off)] = STUCK_OFF
        g[mask == STUCK_ON] = config.g_on
        g[mask == STUCK_OFF] = config.g_off
        return cls(config, g, mask)

    @property
    def rows(self):
        return self.config.rows

    @property
    def cols(self):
        return self.config.cols

    def effective_read_matrix(self, rng):
        """One read's effective conductances (fresh noise, clamped).

        Consumes rows*cols normal draws from `rng` when sigma_frac > 0,
        none otherwise. Exposed so tests can instrument single reads.
        """
        cfg = self.config
        if cfg.sigma_frac == 0:
            return self.g_target.copy()
        noise = rng.standard_normal(self.g_target.shape) * cfg.noise_std
        noise[self.stuck_mask != STUCK_FREE] = 0.0
        return np.clip(self.g_target + noise, cfg.g_off, cfg.g_on)

    def read_vmm(self, v, rng):
        """Analog multiply: returns v @ G_effective for one noisy read."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.rows,):
            raise DimensionError(f"input shape {v.shape}, expected ({self.rows},)")
        if not np.all(np.isfinite(v)):
            raise ValueError("input vector must be finite")
        return v @ self.effective_read_matrix(rng)

    def read_vmm_batch(self, vs, rng):
        """Many reads, one per row of `vs`, each with fresh noise.

        Consumes the random stream exactly as the equivalent sequence of
        read_vmm calls would, so batched and looped reads agree bitwise.
        """
        vs = np.asarray(vs, dtype=np.float64)
        if vs.ndim != 2 or vs.shape[1] != self.rows:
            raise DimensionError(f"input shape {vs.shape}, expected (n, {self.rows})")
        if not np.all(np.isfinite(vs)):
            raise ValueError("input vectors must be finite")
        cfg = self.config
        n = vs.shape[0]
        if cfg.sigma_frac == 0:
            return vs @ self.g_target
        out = np.empty((n, self.cols))
        free = (self.stuck_mask == STUCK_FREE).astype(np.float64)
        chunk = max(1, _BATCH_BUDGET // (self.rows * self.cols))
        for start in range(0, n, chunk):
            stop = min(n, start + chunk)
            noise = rng.standard_normal((stop - start, self.rows, self.cols))
            noise *= cfg.noise_std * free
            noise += self.g_target
            np.clip(noise, cfg.g_off, cfg.g_on, out=noise)
            out[start:stop] = (vs[start:stop, None, :] @ noise)[:, 0, :]
        return out

    def program(self, g_desired):
        """New crossbar with free cells set to clamp(g_desired); stuck cells keep their rail."""
        g_desired = np.asarray(g_desired, dtype=np.float64)
        if g_desired.shape != self.g_target.shape:
            raise DimensionError(
                f"g_desired shape {g_desired.shape}, expected {self.g_target.shape}"
            )
        cfg = self.config
        g = np.clip(g_desired, cfg.g_off, cfg.g_on)
        free = self.stuck_mask == STUCK_FREE
        g = np.where(free, g, self.g_target)
        return Crossbar(cfg, g, self.stuck_mask)

    # --- serialization ---------------------------------------------------

    def to_json_dict(self):
        codes = "".join(_STUCK_TO_CODE[int(s)] for s in self.stuck_mask.ravel())
        return {
            "format": "crossbar",
            "version": 1,
            "config": asdict(self.config),
            "g_target": self.g_target.ravel().tolist(),
            "stuck_mask": codes,
        }

    @classmethod
    def from_json_dict(cls, doc):
        if doc.get("format") != "crossbar" or doc.get("version") != 1:
            raise DataFormatError("not a version-1 crossbar document")
        config = CrossbarConfig(**doc["config"])
        shape = (config.rows, config.cols)
        g = np.asarray(doc["g_target"], dtype=np.float64)
        if g.size != shape[0] * shape[1]:
            raise DataFormatError(f"g_target has {g.size} entries, expected {shape[0] * shape[1]}")
        codes = doc["stuck_mask"]
        if len(codes) != shape[0] * shape[1]:
            raise DataFormatError("stuck_mask length does not match geometry")
        try:
            mask = np.array([_CODE_TO_STUCK[c] for c in codes], dtype=np.int8)
        except KeyError as exc:
            raise DataFormatError(f"unknown stuck code {exc.args[0]!r}") from None
        return cls(config, g.reshape(shape), mask.reshape(shape))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))
