"""Seeded generators for stationary sequences and reference-CDF calibration.

Four stationary mechanisms are provided: iid draws from a reference model,
forward orbits of the intermittent interval map with the neutral fixed point
at 0 (observable x**-a), forward orbits of the doubling map 2x mod 1
(realized on a 128-bit sliding bit window so chaoticity survives far past the
53 iterations native floats allow), and causal linear (MA-infinity) processes
with truncated coefficient families.

Randomness is counter-split: stream `s` of a run with base seed `k` draws
from ``Philox(key=k, counter=[0, 0, purpose, s])``.  Streams are disjoint for
fewer than 2**128 draws each, so replication-level parallelism cannot change
any result.
"""
from __future__ import annotations

import io
import json
import logging
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import zeta

from .errors import ValidationError
from .models import DistributionModel, Tabulated, model_from_dict

__all__ = [
    "IID",
    "IntermittentMap",
    "DoublingMap",
    "CausalLinear",
    "GeometricCoeffs",
    "PolynomialCoeffs",
    "Path",
    "spawn_rng",
    "intermittent_step",
    "generate",
    "generate_batch",
    "calibrate_reference_cdf",
    "tabulate_cdf",
    "spec_from_dict",
]

logger = logging.getLogger(__name__)

_TINY = math.ulp(0.0)
_BELOW_ONE = math.nextafter(1.0, 0.0)

# purpose ids for the counter-splitting rule
PURPOSE_PATH = 0
PURPOSE_RESEED = 1
PURPOSE_GAUSSIAN = 2
PURPOSE_BRIDGE = 3

# resource ceiling for n * (J + 1) work in linear-process generation
_LINEAR_WORK_LIMIT = 2**28
_TRUNCATION_CAP = 2**22


def spawn_rng(seed: int, stream: int = 0, purpose: int = PURPOSE_PATH) -> np.random.Generator:
    """Independent generator for (seed, stream, purpose) via Philox counters."""
    if not (0 <= int(stream) < 2**64):
        raise ValidationError("stream must fit in 64 bits")
    key = int(seed) % 2**128
    return np.random.Generator(
        np.random.Philox(key=key, counter=[0, 0, int(purpose), int(stream)])
    )


# ---------------------------------------------------------------------------
# coefficient families for the linear process
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeometricCoeffs:
    """a_j = rho**j; rho = 0 degenerates to the single coefficient a_0 = 1."""

    rho: float = 0.5

    def __post_init__(self):
        if not (0.0 <= self.rho < 1.0):
            raise ValidationError("geometric family needs rho in [0, 1)")

    def coeff(self, j):
        j_arr = np.asarray(j, dtype=float)
        return np.where(j_arr == 0, 1.0, self.rho ** j_arr)

    def abs_sum(self) -> float:
        return 1.0 / (1.0 - self.rho)

    def abs_tail(self, j: int) -> float:
        if self.rho == 0.0:
            return 0.0
        return self.rho ** (j + 1) / (1.0 - self.rho)

    def decay_exponent(self) -> float:
        return math.inf

    def to_dict(self):
        return {"family": "geometric", "rho": self.rho}


@dataclass(frozen=True)
class PolynomialCoeffs:
    """a_j = (j + offset)**-beta with beta > 1 (absolute summability)."""

    beta: float = 3.0
    offset: float = 1.0

    def __post_init__(self):
        if not (self.beta > 1.0):
            raise ValidationError("polynomial family needs beta > 1")
        if not (self.offset > 0.0):
            raise ValidationError("polynomial family needs offset > 0 (a_0 != 0)")

    def coeff(self, j):
        return (np.asarray(j, dtype=float) + self.offset) ** (-self.beta)

    def abs_sum(self) -> float:
        return float(zeta(self.beta, self.offset))

    def abs_tail(self, j: int) -> float:
        return float(zeta(self.beta, j + 1 + self.offset))

    def decay_exponent(self) -> float:
        return self.beta

    def to_dict(self):
        return {"family": "polynomial", "beta": self.beta, "offset": self.offset}


CoeffFamily = Union[GeometricCoeffs, PolynomialCoeffs]


def coeffs_from_dict(d: dict) -> CoeffFamily:
    fam = d.get("family")
    if fam == "geometric":
        return GeometricCoeffs(float(d["rho"]))
    if fam == "polynomial":
        return PolynomialCoeffs(float(d["beta"]), float(d.get("offset", 1.0)))
    raise ValidationError(f"unknown coefficient family {fam!r}")


# ---------------------------------------------------------------------------
# process specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IID:
    model: DistributionModel

    def to_dict(self):
        return {"variant": "iid", "model": self.model.to_dict()}


@dataclass(frozen=True)
class IntermittentMap:
    """Orbit of T(x) = x(1 + 2^gamma x^gamma) on [0,1/2), 2x-1 on [1/2,1]."""

    gamma: float
    observable_exponent: float
    burn_in: int = 10_000

    def __post_init__(self):
        if not (0.0 < self.gamma < 1.0):
            raise ValidationError("gamma must lie in (0, 1)")
        if not (self.observable_exponent > 0.0):
            raise ValidationError("observable exponent must be positive")
        if self.burn_in < 0:
            raise ValidationError("burn_in must be nonnegative")

    def to_dict(self):
        return {
            "variant": "intermittent",
            "gamma": self.gamma,
            "observable_exponent": self.observable_exponent,
            "burn_in": self.burn_in,
        }


@dataclass(frozen=True)
class DoublingMap:
    observable_exponent: float
    burn_in: int = 10_000

    def __post_init__(self):
        if not (self.observable_exponent > 0.0):
            raise ValidationError("observable exponent must be positive")
        if self.burn_in < 0:
            raise ValidationError("burn_in must be nonnegative")

    def to_dict(self):
        return {
            "variant": "doubling",
            "observable_exponent": self.observable_exponent,
            "burn_in": self.burn_in,
        }


@dataclass(frozen=True)
class CausalLinear:
    """Y_k = sum_{j=0}^{J} a_j eps_{k-j}; J = None picks J from the 1e-8 tail rule."""

    coefficients: CoeffFamily
    innovation: DistributionModel
    truncation: int | None = None

    def __post_init__(self):
        if self.truncation is not None and self.truncation < 1:
            raise ValidationError("truncation must be >= 1")

    def to_dict(self):
        return {
            "variant": "causal_linear",
            "coefficients": self.coefficients.to_dict(),
            "innovation": self.innovation.to_dict(),
            "truncation": self.truncation,
        }


ProcessSpec = Union[IID, IntermittentMap, DoublingMap, CausalLinear]


def spec_from_dict(d: dict) -> ProcessSpec:
    variant = d.get("variant")
    if variant == "iid":
        return IID(model_from_dict(d["model"]))
    if variant == "intermittent":
        return IntermittentMap(
            float(d["gamma"]), float(d["observable_exponent"]), int(d.get("burn_in", 10_000))
        )
    if variant == "doubling":
        return DoublingMap(float(d["observable_exponent"]), int(d.get("burn_in", 10_000)))
    if variant == "causal_linear":
        return CausalLinear(
            coeffs_from_dict(d["coefficients"]),
            model_from_dict(d["innovation"]),
            None if d.get("truncation") is None else int(d["truncation"]),
        )
    raise ValidationError(f"unknown process variant {variant!r}")


@dataclass
class Path:
    """A realized trajectory; a deterministic function of (spec, n, seed, stream)."""

    values: np.ndarray
    spec: ProcessSpec
    seed: int
    stream: int = 0
    truncation_error_bound: float = 0.0

    def to_csv(self, fileobj: io.TextIOBase) -> None:
        header = {
            "spec": self.spec.to_dict(),
            "seed": self.seed,
            "stream": self.stream,
            "truncation_error_bound": self.truncation_error_bound,
        }
        fileobj.write(f"# w1clt-path {json.dumps(header, sort_keys=True)}\n")
        fileobj.write("value\n")
        for v in self.values:
            fileobj.write(f"{float(v)!r}\n")


# ---------------------------------------------------------------------------
# the intermittent map
# ---------------------------------------------------------------------------

def intermittent_step(x: float, gamma: float) -> float:
    """One step of the intermittent map, clamped into (0, 1).

    The exact preimage x = 1/2 maps to 0; the clamp keeps the result at the
    smallest positive float so the pure function never returns a fixed point
    of the lower branch.
    """
    if not (0.0 < x < 1.0):
        raise ValidationError("intermittent map state must lie in (0, 1)")
    if not (0.0 < gamma < 1.0):
        raise ValidationError("gamma must lie in (0, 1)")
    if x < 0.5:
        x = x * (1.0 + 2.0**gamma * x**gamma)
    else:
        x = 2.0 * x - 1.0
    return min(max(x, _TINY), _BELOW_ONE)


def _intermittent_orbit_scalar(spec: IntermittentMap, n: int, rng: np.random.Generator,
                               reseed_rng_factory) -> np.ndarray:
    gamma = spec.gamma
    c = 2.0**gamma
    x = float(rng.random())
    while x == 0.0:
        x = float(rng.random())
    out = np.empty(n)
    reseed = None
    reseeds = 0
    total = spec.burn_in + n
    for i in range(total):
        if x < 0.5:
            x = x * (1.0 + c * x**gamma)
        else:
            x = 2.0 * x - 1.0
        if x == 0.0:
            if reseed is None:
                reseed = reseed_rng_factory()
            x = float(reseed.random())
            reseeds += 1
        elif x > _BELOW_ONE:
            x = _BELOW_ONE
        if i >= spec.burn_in:
            out[i - spec.burn_in] = x
    if reseeds:
        logger.info("intermittent orbit re-randomized %d exact-zero state(s)", reseeds)
    return out ** (-spec.observable_exponent)


def _intermittent_orbit_batch(spec: IntermittentMap, n: int, seed: int,
                              streams: np.ndarray) -> np.ndarray:
    gamma = spec.gamma
    c = 2.0**gamma
    x = np.empty(len(streams))
    for i, s in enumerate(streams):
        x[i] = spawn_rng(seed, int(s), PURPOSE_PATH).random()
    x = np.where(x == 0.0, 0.5, x)  # measure-zero guard on the initial draw
    out = np.empty((len(streams), n))
    reseeds = 0
    for i in range(spec.burn_in + n):
        xg = x**gamma
        x = np.where(x < 0.5, x * (1.0 + c * xg), 2.0 * x - 1.0)
        zero = x == 0.0
        if zero.any():
            for lane in np.nonzero(zero)[0]:
                x[lane] = spawn_rng(seed, int(streams[lane]), PURPOSE_RESEED).random()
                reseeds += 1
        np.clip(x, _TINY, _BELOW_ONE, out=x)
        if i >= spec.burn_in:
            out[:, i - spec.burn_in] = x
    if reseeds:
        logger.info("intermittent batch re-randomized %d exact-zero state(s)", reseeds)
    return out ** (-spec.observable_exponent)


# ---------------------------------------------------------------------------
# the doubling map on a 128-bit sliding bit window
# ---------------------------------------------------------------------------

def _doubling_orbit(spec: DoublingMap, n: int, rng: np.random.Generator) -> np.ndarray:
    # Orbit step k of 2x mod 1 from a Lebesgue-random start is the 128-bit
    # window at bit offset k of one random bit stream; drawing the stream
    # lazily realizes the uniform x0 with as many bits as the orbit needs.
    offsets = spec.burn_in + np.arange(n, dtype=np.int64)
    n_words = int(offsets[-1] // 64) + 4
    words = rng.integers(
        0, np.iinfo(np.uint64).max, size=n_words, dtype=np.uint64, endpoint=True
    )
    q, s = np.divmod(offsets, 64)
    s = s.astype(np.uint64)
    rs = np.where(s == 0, np.uint64(63), np.uint64(64) - s)

    def window(idx):
        w0, w1 = words[idx], words[idx + 1]
        high = (w0 << s) | np.where(s == 0, np.uint64(0), w1 >> rs)
        return high

    hi = window(q)
    lo = window(q + 1)
    x = hi * 2.0**-64 + lo * 2.0**-128
    np.maximum(x, 2.0**-128, out=x)
    return x ** (-spec.observable_exponent)


# ---------------------------------------------------------------------------
# linear process
# ---------------------------------------------------------------------------

def _resolve_truncation(family: CoeffFamily, requested: int | None, tol: float = 1e-8) -> int:
    if requested is not None:
        return int(requested)
    if family.abs_tail(0) < tol:
        return 1
    lo, hi = 1, 2
    while family.abs_tail(hi) >= tol:
        hi *= 2
        if hi > _TRUNCATION_CAP:
            raise ValidationError(
                "coefficient tail decays too slowly for the default truncation rule; "
                "set an explicit truncation"
            )
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if family.abs_tail(mid) < tol:
            hi = mid
        else:
            lo = mid
    return hi


def _linear_path(spec: CausalLinear, n: int, rng: np.random.Generator) -> tuple[np.ndarray, float]:
    j_max = _resolve_truncation(spec.coefficients, spec.truncation)
    if n * (j_max + 1) > _LINEAR_WORK_LIMIT:
        raise ValidationError(
            f"n * (J + 1) = {n * (j_max + 1)} exceeds the resource limit {_LINEAR_WORK_LIMIT}"
        )
    coeffs = np.asarray(spec.coefficients.coeff(np.arange(j_max + 1)), dtype=float)
    eps = np.asarray(spec.innovation.quantile(rng.random(n + j_max)), dtype=float)
    y = np.convolve(coeffs, eps)[j_max : j_max + n]
    bound = spec.coefficients.abs_tail(j_max) * spec.innovation.mean_abs()
    return y, bound


# ---------------------------------------------------------------------------
# public generation surface
# ---------------------------------------------------------------------------

def generate(spec: ProcessSpec, n: int, seed: int, stream: int = 0) -> Path:
    """Realize one trajectory of length n; bitwise reproducible given inputs."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    rng = spawn_rng(seed, stream, PURPOSE_PATH)
    bound = 0.0
    if isinstance(spec, IID):
        values = np.asarray(spec.model.quantile(rng.random(n)), dtype=float)
    elif isinstance(spec, IntermittentMap):
        values = _intermittent_orbit_scalar(
            spec, n, rng, lambda: spawn_rng(seed, stream, PURPOSE_RESEED)
        )
    elif isinstance(spec, DoublingMap):
        values = _doubling_orbit(spec, n, rng)
    elif isinstance(spec, CausalLinear):
        values, bound = _linear_path(spec, n, rng)
    else:
        raise ValidationError(f"unknown process spec {type(spec).__name__}")
    return Path(values, spec, int(seed), int(stream), bound)


def generate_batch(spec: ProcessSpec, n: int, n_paths: int, seed: int,
                   first_stream: int = 0) -> np.ndarray:
    """Stack of ``n_paths`` trajectories, one per stream, shape (n_paths, n).

    Row r equals ``generate(spec, n, seed, first_stream + r).values`` for
    every variant except the intermittent map, whose batch path iterates all
    lanes through numpy's vectorized power kernel (last-ulp differences from
    the scalar libm orbit).  Both realizations are bitwise reproducible and
    lane values do not depend on how a batch is chunked, so parallel
    replication is scheduling-invariant either way.
    """
    if n_paths < 1:
        raise ValidationError("n_paths must be >= 1")
    streams = first_stream + np.arange(n_paths)
    if isinstance(spec, IntermittentMap):
        if n < 1:
            raise ValidationError("n must be >= 1")
        return _intermittent_orbit_batch(spec, n, seed, streams)
    rows = [generate(spec, n, seed, int(s)).values for s in streams]
    return np.stack(rows, axis=0)


def tabulate_cdf(values, grid) -> Tabulated:
    """Empirical CDF of `values` sampled on `grid`, monotone by construction.

    The last grid point absorbs any mass beyond it (documented tail cutoff).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or not np.all(np.diff(grid) > 0):
        raise ValidationError("grid must be strictly increasing with >= 2 points")
    v = np.sort(np.asarray(values, dtype=float).ravel())
    cdf = np.searchsorted(v, grid, side="right") / v.size
    cdf = np.maximum.accumulate(np.clip(cdf, 0.0, 1.0))
    cdf[-1] = 1.0
    return Tabulated(grid, cdf, interp="linear")


def calibrate_reference_cdf(spec: ProcessSpec, length: int, grid, seed: int) -> Tabulated:
    """Tabulated reference CDF from a single long trajectory with burn-in."""
    path = generate(spec, length, seed, stream=0)
    return tabulate_cdf(path.values, grid)
