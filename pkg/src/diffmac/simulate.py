"""Monte Carlo engine: channel, trials, statistics.

Blocks are processed in fixed-size chunks.  Chunk ``c`` of a run with seed
``s`` draws every random number from its own stream, seeded by
``SeedSequence(s, spawn_key=(phase, c))``, and the per-chunk sums are
combined in chunk order.  A report therefore depends only on the config,
never on how many workers produced it.
"""

from __future__ import annotations

import dataclasses
import functools
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import analysis, schemes
from .analysis import SCHEMES, ChannelModel, SchemeParams
from .lattice import KINDS, Lattice, make_lattice, sample_dither, scale_to_power
from .sources import SourceModel, generate_block

CHUNK_BLOCKS = 4096
DEFAULT_CUBIC_DIM = 8

_PHASE_MAIN = 0
_PHASE_RHO_PRIME = 1


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    src: SourceModel
    ch: ChannelModel
    scheme: str
    lattice_kind: str | None = None
    blocks: int = 10_000
    seed: int = 0
    # block length for uncoded runs, dimension for cubic-zn
    n_override: int | None = None
    noiseless: bool = False
    rho_prime_blocks: int = 100_000

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.scheme != "uncoded":
            if self.lattice_kind is None:
                raise ValueError(f"{self.scheme} needs a lattice kind")
            if self.lattice_kind not in KINDS:
                raise ValueError(f"unknown lattice kind {self.lattice_kind!r}; expected one of {KINDS}")
        if self.blocks < 1:
            raise ValueError(f"blocks must be >= 1, got {self.blocks}")
        if self.rho_prime_blocks < 1:
            raise ValueError(f"rho_prime_blocks must be >= 1, got {self.rho_prime_blocks}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.n_override is not None and self.n_override < 1:
            raise ValueError(f"n_override must be positive, got {self.n_override}")

    def lattice(self) -> Lattice | None:
        """Lattice of this config, scaled to second moment P."""
        if self.scheme == "uncoded":
            return None
        dim = None
        if self.lattice_kind == "cubic-zn":
            dim = self.n_override or DEFAULT_CUBIC_DIM
        return scale_to_power(make_lattice(self.lattice_kind, dim), self.ch.P)

    def block_length(self) -> int:
        lat = self.lattice()
        if lat is not None:
            return lat.dim
        return self.n_override or 1


@dataclasses.dataclass(frozen=True)
class SimulationReport:
    empirical_distortion: float
    stderr: float
    conditional_distortion: float
    wrap_rate: float
    analytic_distortion: float
    analytic_bound: float
    gap_bits: float
    samples: int
    rho_prime_hat: float | None = None
    rho_prime_stderr: float | None = None
    conditional_stderr: float = math.nan
    feasible: bool = True


def substream(seed: int, phase: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(phase, chunk))))


def _chunks(blocks: int):
    return [(i, min(CHUNK_BLOCKS, blocks - i * CHUNK_BLOCKS)) for i in range(math.ceil(blocks / CHUNK_BLOCKS))]


def _map(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def apply_channel(x: schemes.ChannelInputPair, ch: ChannelModel, rng: np.random.Generator, noiseless: bool = False):
    """y = x1 + x2 + z with z ~ N(0, N) i.i.d.; ``noiseless`` zeroes z."""
    x1 = np.asarray(x.x1)
    x2 = np.asarray(x.x2)
    if x1.shape != x2.shape:
        raise ValueError(f"input shapes differ: {x1.shape} vs {x2.shape}")
    noise = rng.standard_normal(x1.shape) * math.sqrt(ch.N)
    if noiseless:
        noise = np.zeros_like(noise)
    return x1 + x2 + noise


def _encode(cfg, lat, params, block, rng):
    if cfg.scheme == "uncoded":
        return schemes.encode_uncoded(block, cfg.src, cfg.ch), None
    shape = block.s1.shape[:-1]
    if cfg.scheme == "lattice-independent":
        u1 = sample_dither(lat, rng, shape)
        u2 = sample_dither(lat, rng, shape)
        return schemes.encode_lattice_independent(block, params, lat, u1, u2), (u1, u2)
    u = sample_dither(lat, rng, shape)
    return schemes.encode_lattice_common(block, lat, u), (u,)


def _run_chunk(cfg: ExperimentConfig, lat, params: SchemeParams, chunk):
    index, nblk = chunk
    rng = substream(cfg.seed, _PHASE_MAIN, index)
    n = lat.dim if lat is not None else cfg.block_length()
    block = generate_block(cfg.src, (nblk, n), rng)
    pair, dithers = _encode(cfg, lat, params, block, rng)
    y = apply_channel(pair, cfg.ch, rng, noiseless=cfg.noiseless)
    z = y - pair.x1 - pair.x2

    if cfg.scheme == "uncoded":
        out = schemes.decode_uncoded(y, cfg.src, cfg.ch)
    elif cfg.scheme == "lattice-independent":
        genie = schemes.independent_genie(block, pair, params, z)
        out = schemes.decode_lattice_independent(y, params, lat, *dithers, genie=genie)
    else:
        genie = schemes.common_genie(block, pair, params.alpha, z)
        out = schemes.decode_lattice_common(y, lat, dithers[0], params.alpha, params.k_coeff, genie=genie)

    err = np.mean((out.estimate - block.s3) ** 2, axis=-1)
    kept = err[~out.wrapped]
    return (
        nblk,
        float(np.sum(err)),
        float(np.sum(err * err)),
        int(kept.size),
        float(np.sum(kept)),
        float(np.sum(kept * kept)),
    )


def _mean_stderr(count, total, total_sq):
    if count == 0:
        return math.nan, math.nan
    mean = total / count
    if count == 1:
        return mean, math.nan
    var = max(total_sq - count * mean * mean, 0.0) / (count - 1)
    return mean, math.sqrt(var / count)


def _rho_prime_chunk(cfg: ExperimentConfig, lat, params, chunk):
    index, nblk = chunk
    rng = substream(cfg.seed, _PHASE_RHO_PRIME, index)
    block = generate_block(cfg.src, (nblk, lat.dim), rng)
    pair, _ = _encode(cfg, lat, params, block, rng)
    return float(np.sum(pair.x1 * pair.x2)), float(np.sum(pair.x1**2)), float(np.sum(pair.x2**2))


def estimate_rho_prime(cfg: ExperimentConfig, workers: int = 1):
    """Empirical correlation coefficient between the two users' channel inputs.

    Runs ``cfg.rho_prime_blocks`` fresh encodings on a stream disjoint from the
    main run.  The standard error comes from batch means over chunks.
    Works for either lattice scheme; the independent-dither scheme serves as
    a zero-correlation control.
    """
    if cfg.scheme == "uncoded":
        raise ValueError("rho_prime is only defined for the lattice schemes")
    lat = cfg.lattice()
    params = analysis.independent_params(cfg.src, cfg.ch) if cfg.scheme == "lattice-independent" else None
    parts = _map(functools.partial(_rho_prime_chunk, cfg, lat, params), _chunks(cfg.rho_prime_blocks), workers)
    sxy = sum(p[0] for p in parts)
    sxx = sum(p[1] for p in parts)
    syy = sum(p[2] for p in parts)
    r = sxy / math.sqrt(sxx * syy)
    batch = np.array([p[0] / math.sqrt(p[1] * p[2]) for p in parts])
    se = float(np.std(batch, ddof=1) / math.sqrt(batch.size)) if batch.size > 1 else math.nan
    return r, se


def scheme_params(cfg: ExperimentConfig, workers: int = 1):
    """Constants for ``cfg`` plus the (rho_prime_hat, stderr) pair when measured."""
    if cfg.scheme == "uncoded":
        return SchemeParams(scheme="uncoded"), (None, None)
    if cfg.scheme == "lattice-independent":
        return analysis.independent_params(cfg.src, cfg.ch), (None, None)
    rp, rp_se = estimate_rho_prime(cfg, workers=workers)
    return analysis.common_params(cfg.src, cfg.ch, rp), (rp, rp_se)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> SimulationReport:
    params, (rp, rp_se) = scheme_params(cfg, workers=workers)
    lat = cfg.lattice()
    parts = _map(functools.partial(_run_chunk, cfg, lat, params), _chunks(cfg.blocks), workers)

    blocks = sum(p[0] for p in parts)
    d_emp, se = _mean_stderr(blocks, sum(p[1] for p in parts), sum(p[2] for p in parts))
    kept = sum(p[3] for p in parts)
    d_cond, se_cond = _mean_stderr(kept, sum(p[4] for p in parts), sum(p[5] for p in parts))

    d_an = analysis.analytic_distortion(cfg.scheme, cfg.src, cfg.ch, rp)
    d_bound = analysis.distortion_lower_bound(cfg.src, cfg.ch)
    return SimulationReport(
        empirical_distortion=d_emp,
        stderr=se,
        conditional_distortion=d_cond,
        conditional_stderr=se_cond,
        wrap_rate=(blocks - kept) / blocks,
        rho_prime_hat=rp,
        rho_prime_stderr=rp_se,
        analytic_distortion=d_an,
        analytic_bound=d_bound,
        gap_bits=math.log2(d_an / d_bound),
        samples=blocks * cfg.block_length(),
        feasible=params.feasible,
    )


@dataclasses.dataclass(frozen=True)
class SweepError:
    index: int
    config: ExperimentConfig
    message: str


def _run_guarded(item):
    index, cfg = item
    try:
        return run_experiment(cfg)
    except ValueError as exc:
        return SweepError(index=index, config=cfg, message=str(exc))


def sweep(grid, workers: int = 1):
    """Run every config; failures come back as ``SweepError`` in place."""
    grid = list(grid)
    if not grid:
        raise ValueError("sweep grid is empty")
    return _map(_run_guarded, list(enumerate(grid)), workers)
