"""Monte Carlo for the weighted-path endpoint.

Two routes produce samples of the normalised endpoint Y_t:

``endpoint_exact``
    inverse-CDF sampling of the analytic law q(y).
``filter_paths``
    full homodyne records from the diffusive filtering equation

        d pi = L_*(pi) dt + (s- pi + pi s+ - tr(sigma_x pi) pi) dW,
        dY   = tr(sigma_x pi) dt + dW,

    accumulated as Y_t = beta^{-1} sum e^{-tau/2} dY_tau.

Randomness is counter based (Philox): sample ``i`` always draws from the
same counters whatever the chunking or worker count, so results are a pure
function of (config, state).
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from numpy.random import Generator, Philox
from scipy import stats
from scipy.interpolate import PchipInterpolator

from .endpoint import TimeHorizon, as_horizon, scalar_cdf_q
from .pointers import PointerFunction
from .qubit import BlochVector, expectation

log = logging.getLogger(__name__)

METHODS = ("endpoint_exact", "filter_paths")

CDF_NODES = 4096
CDF_HALF_WIDTH = 8.0

PATH_BLOCK = 4096
STEP_CHUNK = 1024
POSITIVITY_TOL = 1e-9
RETRY_BUDGET = 6

# stream tags in the high word of the Philox key
_TAG_ENDPOINT = 0
_TAG_PATH = 1
_TAG_REFINE = 2


class SimulationError(RuntimeError):
    pass


def worker_count() -> int:
    """Worker cap from ``HPL_THREADS`` (0 or unset = automatic)."""
    raw = os.environ.get("HPL_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"HPL_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("HPL_THREADS must be non-negative")
    return n if n > 0 else max(1, min(8, os.cpu_count() or 1))


@dataclass(frozen=True)
class SimConfig:
    horizon: TimeHorizon
    n_samples: int
    seed: int
    method: str = "endpoint_exact"
    dt: float = 1e-3

    def __post_init__(self):
        object.__setattr__(self, "horizon", as_horizon(self.horizon))
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.method == "filter_paths":
            if self.horizon.is_infinite:
                raise ValueError("filter_paths needs a finite horizon")
            if self.dt > self.horizon.t / 100:
                raise ValueError("filter_paths needs dt <= t / 100")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon.t / self.dt))


@dataclass(frozen=True)
class EndpointSample:
    y: float
    record: np.ndarray | None = None


@dataclass
class EndpointSamples:
    """Samples of the normalised endpoint, stored as arrays.

    ``records`` holds the per-step increments dY (filter paths, on request);
    ``final_quadrature`` the conditional expectation tr(sigma_x pi_t) at the
    end of each filtered path.
    """

    y: np.ndarray
    config: SimConfig
    rho: BlochVector
    records: np.ndarray | None = None
    final_quadrature: np.ndarray | None = None
    max_bloch_norm: np.ndarray | None = None
    rejected_steps: int = 0
    extra: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.y)

    def __getitem__(self, i: int) -> EndpointSample:
        rec = None if self.records is None else self.records[i]
        return EndpointSample(float(self.y[i]), rec)

    def __iter__(self) -> Iterator[EndpointSample]:
        for i in range(len(self)):
            yield self[i]


# --- exact endpoint sampling -----------------------------------------------


def _philox_key(seed: int, tag: int) -> int:
    return (tag << 64) | seed


def counter_uniforms(seed: int, start: int, count: int) -> np.ndarray:
    """Uniforms in [0, 1) for sample indices start .. start+count-1.

    Sample ``i`` is the ``i``-th 64-bit Philox output under the seed's key.
    """
    lead = start % 4
    bg = Philox(key=_philox_key(seed, _TAG_ENDPOINT), counter=start // 4)
    raw = bg.random_raw(count + lead)[lead:]
    return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


class InverseCDFSampler:
    """Monotone cubic inverse of the closed-form CDF of q on a node grid."""

    def __init__(self, horizon, rho: BlochVector, nodes: int = CDF_NODES, half_width: float = CDF_HALF_WIDTH):
        y = np.linspace(-half_width, half_width, nodes)
        cdf = scalar_cdf_q(y, horizon, rho)
        cdf = (cdf - cdf[0]) / (cdf[-1] - cdf[0])
        keep = np.concatenate(([True], np.diff(cdf) > 0))
        self.nodes = y[keep]
        self.cdf = cdf[keep]
        self._inverse = PchipInterpolator(self.cdf, self.nodes, extrapolate=False)

    def __call__(self, u) -> np.ndarray:
        u = np.clip(np.asarray(u, dtype=float), self.cdf[0], self.cdf[-1])
        return self._inverse(u)


def sample_endpoints(rho: BlochVector, cfg: SimConfig, chunk: int = 1 << 18) -> EndpointSamples:
    """i.i.d. draws of Y_t from q by inverse-CDF sampling."""
    if cfg.method != "endpoint_exact":
        raise ValueError("sample_endpoints needs method='endpoint_exact'")
    sampler = InverseCDFSampler(cfg.horizon, rho)
    out = np.empty(cfg.n_samples)
    for start in range(0, cfg.n_samples, chunk):
        n = min(chunk, cfg.n_samples - start)
        out[start : start + n] = sampler(counter_uniforms(cfg.seed, start, n))
    return EndpointSamples(out, cfg, rho)


# --- filtered homodyne paths ------------------------------------------------


def _kraus_step(a, cr, ci, dy, dt):
    """pi -> M pi M^+ / tr with M = I - s+s- dt/2 + s- dY.

    The state is the excited population ``a`` = pi_00 and the coherence
    pi_01 = ``cr`` + i ``ci``.  Positive by construction and equal to the
    Euler-Maruyama step of the filter to first order.
    """
    damp = 1.0 - 0.5 * dt
    new00 = (damp * damp) * a
    inv = 1.0 / (new00 + a * dy * dy + 2.0 * dy * cr + 1.0 - a)
    return new00 * inv, damp * (a * dy + cr) * inv, damp * ci * inv


def _bloch_norm_sq(a, cr, ci):
    return (2.0 * a - 1.0) ** 2 + 4.0 * (cr * cr + ci * ci)


_NORM_SQ_LIMIT = (1.0 + POSITIVITY_TOL) ** 2


def _advance(state, dw, dt, rng_refine, idx, depth=0):
    """One filter step of length dt for all paths.

    Paths whose state leaves the Bloch ball are redone as two half steps
    with a Brownian-bridge split of their increment, at most
    ``RETRY_BUDGET`` times.  Returns (state, dY, norm^2, rejections).
    """
    a, cr, ci = state
    dy = 2.0 * dt * cr + dw
    new = _kraus_step(a, cr, ci, dy, dt)
    norm_sq = _bloch_norm_sq(*new)
    bad = ~(norm_sq <= _NORM_SQ_LIMIT)
    if not bad.any():
        return new, dy, norm_sq, 0
    if depth >= RETRY_BUDGET:
        raise SimulationError(f"filter state lost positivity after {depth} step halvings")
    bi = np.nonzero(bad)[0]
    xi = np.array([rng_refine(int(idx[i])).standard_normal() for i in bi])
    half = 0.5 * dt
    dw_a = 0.5 * dw[bi] + 0.5 * math.sqrt(dt) * xi
    dw_b = dw[bi] - dw_a
    sub = tuple(v[bi] for v in state)
    mid, dya, _, n1 = _advance(sub, dw_a, half, rng_refine, idx[bi], depth + 1)
    end, dyb, nsq, n2 = _advance(mid, dw_b, half, rng_refine, idx[bi], depth + 1)
    for full, part in zip(new, end):
        full[bi] = part
    dy[bi] = dya + dyb
    norm_sq[bi] = nsq
    return new, dy, norm_sq, len(bi) + n1 + n2


def _path_generators(seed: int, start: int, count: int, tag: int) -> list[Generator]:
    key = _philox_key(seed, tag)
    return [Generator(Philox(key=key, counter=(start + i) << 128)) for i in range(count)]


def _simulate_block(rho: BlochVector, cfg: SimConfig, start: int, count: int, keep_records: bool):
    dm = rho.density_matrix()
    state = (
        np.full(count, dm[0, 0].real),
        np.full(count, dm[0, 1].real),
        np.full(count, dm[0, 1].imag),
    )
    n_steps = cfg.n_steps
    dt = cfg.horizon.t / n_steps
    sqdt = math.sqrt(dt)
    gens = _path_generators(cfg.seed, start, count, _TAG_PATH)
    refiners: dict[int, Generator] = {}

    def rng_refine(path: int) -> Generator:
        if path not in refiners:
            (refiners[path],) = _path_generators(cfg.seed, path, 1, _TAG_REFINE)
        return refiners[path]

    idx = np.arange(start, start + count)
    acc = np.zeros(count)
    max_norm_sq = _bloch_norm_sq(*state)
    records = np.empty((count, n_steps)) if keep_records else None
    rejected = 0
    buf = np.empty((count, STEP_CHUNK))
    for s0 in range(0, n_steps, STEP_CHUNK):
        m = min(STEP_CHUNK, n_steps - s0)
        # rows are steps so each step reads contiguous memory
        for g, row in zip(gens, buf):
            g.standard_normal(out=row[:m])
        noise = (buf[:, :m] * sqdt).T.copy()
        for j in range(m):
            step = s0 + j
            state, dy, norm_sq, nrej = _advance(state, noise[j], dt, rng_refine, idx)
            rejected += nrej
            # midpoint weight: sum of w^2 dt matches 1 - e^{-t} to O(dt^2)
            acc += math.exp(-0.5 * (step + 0.5) * dt) * dy
            np.maximum(max_norm_sq, norm_sq, out=max_norm_sq)
            if records is not None:
                records[:, step] = dy
    beta = math.sqrt(-math.expm1(-n_steps * dt))
    return acc / beta, 2.0 * state[1], np.sqrt(max_norm_sq), records, rejected


def simulate_filter_paths(rho: BlochVector, cfg: SimConfig, keep_records: bool = False) -> EndpointSamples:
    """Endpoint samples from simulated homodyne records."""
    if cfg.method != "filter_paths":
        raise ValueError("simulate_filter_paths needs method='filter_paths'")
    blocks = [(s, min(PATH_BLOCK, cfg.n_samples - s)) for s in range(0, cfg.n_samples, PATH_BLOCK)]
    workers = min(worker_count(), len(blocks))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda b: _simulate_block(rho, cfg, b[0], b[1], keep_records), blocks))
    else:
        results = [_simulate_block(rho, cfg, s, n, keep_records) for s, n in blocks]
    y = np.concatenate([r[0] for r in results])
    final_q = np.concatenate([r[1] for r in results])
    max_norm = np.concatenate([r[2] for r in results])
    records = np.concatenate([r[3] for r in results]) if keep_records else None
    rejected = sum(r[4] for r in results)
    if rejected:
        log.info("filter: %d step rejections", rejected)
    return EndpointSamples(y, cfg, rho, records, final_q, max_norm, rejected)


def simulate(rho: BlochVector, cfg: SimConfig) -> EndpointSamples:
    if cfg.method == "endpoint_exact":
        return sample_endpoints(rho, cfg)
    return simulate_filter_paths(rho, cfg)


# --- estimators and goodness of fit ------------------------------------------


def empirical_quality(samples, h: PointerFunction, rho: BlochVector, target) -> tuple[float, float]:
    """Sample mean and variance of h(Y).

    The mean estimates rho(target); the variance minus Var_rho(target) (see
    :func:`state_variance`) estimates the added variance in this state.
    """
    y = samples.y if isinstance(samples, EndpointSamples) else np.asarray(samples, dtype=float)
    if len(y) < 1000:
        raise ValueError("empirical_quality needs at least 1000 samples")
    v = h(y)
    return float(np.mean(v)), float(np.var(v, ddof=1))


def state_variance(rho: BlochVector, target) -> float:
    """Var_rho(X) = rho(X^2) - rho(X)^2."""
    x = np.asarray(target, dtype=complex)
    return expectation(rho, x @ x) - expectation(rho, x) ** 2


def ks_against_q(y, horizon, rho: BlochVector):
    """One-sample Kolmogorov-Smirnov test of ``y`` against the law q."""
    hz = as_horizon(horizon)
    return stats.kstest(np.asarray(y), lambda v: scalar_cdf_q(v, hz, rho))


def chi_square_against_q(y, horizon, rho: BlochVector, bins: int = 100, lo: float = -5.0, hi: float = 5.0):
    """Pearson chi-square of a histogram of ``y`` against q.

    Equal-width bins on [lo, hi] plus the two tails.
    """
    hz = as_horizon(horizon)
    y = np.asarray(y)
    edges = np.concatenate(([-np.inf], np.linspace(lo, hi, bins + 1), [np.inf]))
    observed, _ = np.histogram(y, bins=edges)
    cdf = scalar_cdf_q(edges, hz, rho)
    expected = np.diff(cdf) * len(y)
    keep = expected > 5.0
    # fold sparse bins into a single remainder cell
    obs = np.append(observed[keep], observed[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    if exp[-1] == 0.0:
        obs, exp = obs[:-1], exp[:-1]
    exp = exp * obs.sum() / exp.sum()
    return stats.chisquare(obs, exp)
