"""Monte Carlo experiments: finite-n statistics vs the sampled limit law.

Replicate r of the n_values[i] run draws from stream (i << 32) | r of the
configured base seed, so outputs are byte-identical for any worker count.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .limitlaw import StatisticSample
from .models import DistributionModel, model_from_dict
from .processes import (
    IntermittentMap,
    ProcessSpec,
    generate,
    generate_batch,
    spec_from_dict,
    tabulate_cdf,
)
from .transport import w1_sample_vs_model, w1_two_samples

__all__ = [
    "ExperimentConfig",
    "ComparisonReport",
    "ProbeReport",
    "ks_two_sample",
    "run_clt_experiment",
    "compare_distributions",
    "compare_against_limit",
    "divergence_probe",
    "auto_calibration_grid",
]

_REPLICATE_CHUNK = 256
SCHEMA_VERSION = 1


def ks_two_sample(x, y) -> float:
    """Two-sample Kolmogorov-Smirnov statistic (sup CDF gap)."""
    xs = np.sort(np.asarray(x, dtype=float).ravel())
    ys = np.sort(np.asarray(y, dtype=float).ravel())
    if xs.size == 0 or ys.size == 0:
        raise ValidationError("samples must be nonempty")
    merged = np.concatenate([xs, ys])
    fx = np.searchsorted(xs, merged, side="right") / xs.size
    fy = np.searchsorted(ys, merged, side="right") / ys.size
    return float(np.max(np.abs(fx - fy)))


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    process: ProcessSpec
    n_values: list[int]
    replications: int
    base_seed: int
    grid_size: int = 256
    grid_scheme: str = "quantile"  # "quantile" | "vartail"
    lag_cutoff: int = 0
    sim_length: int = 100_000
    limit_replications: int = 10_000
    reference_model: DistributionModel | None = None
    calibration_length: int | None = None  # None => 10 * max(n) when calibrating
    calibration_grid_size: int = 2048
    tail_tol: float = 1e-12
    out_dir: str = "out"

    def __post_init__(self):
        if len(self.n_values) == 0 or any(
            b <= a for a, b in zip(self.n_values, self.n_values[1:])
        ):
            raise ValidationError("n_values must be a nonempty increasing list")
        if self.replications < 2:
            raise ValidationError("need at least 2 replications")
        if self.reference_model is None and self.calibration_length is None:
            # calibration is still possible with the auto length rule; an
            # explicit opt-in distinguishes it from a forgotten reference.
            raise ValidationError(
                "no reference CDF: supply reference_model or calibration_length"
            )

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValidationError(f"config schema_version must be {SCHEMA_VERSION}")
        ref = d.get("reference", {})
        model = model_from_dict(ref["analytic"]) if "analytic" in ref else None
        cal = ref.get("calibration_length")
        grid = d.get("grid", {})
        limit = d.get("limit", {})
        return cls(
            process=spec_from_dict(d["process"]),
            n_values=[int(v) for v in d["n_values"]],
            replications=int(d["replications"]),
            base_seed=int(d["base_seed"]),
            grid_size=int(grid.get("size", 256)),
            grid_scheme=str(grid.get("scheme", "quantile")),
            lag_cutoff=int(limit.get("lag_cutoff", 0)),
            sim_length=int(limit.get("sim_length", 100_000)),
            limit_replications=int(limit.get("replications", 10_000)),
            reference_model=model,
            calibration_length=None if cal in (None, "auto") else int(cal),
            calibration_grid_size=int(ref.get("calibration_grid_size", 2048)),
            tail_tol=float(d.get("tail_tol", 1e-12)),
            out_dir=str(d.get("out_dir", "out")),
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))


@dataclass
class ComparisonReport:
    ks_two_sample: float
    w1_between_statistics: float
    mean_gap: float
    table: list[dict] = field(default_factory=list)
    verdict: str = ""

    def to_dict(self) -> dict:
        return {
            "ks_two_sample": self.ks_two_sample,
            "w1_between_statistics": self.w1_between_statistics,
            "mean_gap": self.mean_gap,
            "table": self.table,
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass
class ProbeReport:
    medians: dict
    ratios: list[float]
    verdict: str  # "stabilizing" | "non-stabilizing" | "indeterminate" | "insufficient data"
    growth_factor: float

    def to_dict(self) -> dict:
        return {
            "medians": {str(k): v for k, v in self.medians.items()},
            "ratios": self.ratios,
            "verdict": self.verdict,
            "growth_factor": self.growth_factor,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# reference resolution
# ---------------------------------------------------------------------------

def auto_calibration_grid(values: np.ndarray, size: int) -> np.ndarray:
    """Quantile-based grid over an orbit's observed range."""
    levels = (np.arange(size) + 0.5) / size
    grid = np.quantile(values, levels)
    grid = np.unique(np.concatenate([[values.min()], grid, [values.max()]]))
    if len(grid) < 2:
        grid = np.array([values.min(), values.min() + 1.0])
    return grid


def resolve_reference(cfg: ExperimentConfig) -> tuple[DistributionModel, dict]:
    if cfg.reference_model is not None:
        return cfg.reference_model, {"reference": "analytic"}
    length = cfg.calibration_length or 10 * max(cfg.n_values)
    path = generate(cfg.process, length, cfg.base_seed + 0x5EED, stream=0)
    # one long orbit; the calibration stream is disjoint from every replicate
    grid = auto_calibration_grid(path.values, cfg.calibration_grid_size)
    model = tabulate_cdf(path.values, grid)
    meta = {
        "reference": "calibrated",
        "calibration_length": length,
        "calibration_grid_size": len(grid),
    }
    return model, meta


# ---------------------------------------------------------------------------
# the experiment
# ---------------------------------------------------------------------------

def _tn_chunk(spec: ProcessSpec, reference: DistributionModel, n: int, seed: int,
              first_stream: int, count: int, tail_tol: float) -> np.ndarray:
    values = generate_batch(spec, n, count, seed, first_stream=first_stream)
    root_n = math.sqrt(n)
    return np.array(
        [root_n * w1_sample_vs_model(values[r], reference, tail_tol) for r in range(count)]
    )


def _tn_sample(spec: ProcessSpec, reference: DistributionModel, n: int,
               replications: int, seed: int, n_index: int, tail_tol: float,
               threads: int) -> np.ndarray:
    base_stream = n_index << 32
    chunks = [
        (base_stream + start, min(_REPLICATE_CHUNK, replications - start))
        for start in range(0, replications, _REPLICATE_CHUNK)
    ]
    out = np.empty(replications)

    def work(arg):
        first, count = arg
        return first, _tn_chunk(spec, reference, n, seed, first, count, tail_tol)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, chunks))
    else:
        results = [work(c) for c in chunks]
    for first, vals in results:
        offset = first - base_stream
        out[offset : offset + len(vals)] = vals
    return out


def run_clt_experiment(cfg: ExperimentConfig, threads: int = 1) -> dict[int, StatisticSample]:
    """R replicates of T_n = sqrt(n) * d1(F_n, F) for each configured n."""
    reference, ref_meta = resolve_reference(cfg)
    out: dict[int, StatisticSample] = {}
    for i, n in enumerate(cfg.n_values):
        values = _tn_sample(
            cfg.process, reference, n, cfg.replications, cfg.base_seed, i,
            cfg.tail_tol, threads,
        )
        out[n] = StatisticSample(
            values,
            "finite_n",
            metadata={
                "n": n,
                "replications": cfg.replications,
                "base_seed": cfg.base_seed,
                "stream_rule": "stream = (n_index << 32) | replicate",
                "process": cfg.process.to_dict(),
                **ref_meta,
            },
        )
    return out


def compare_distributions(a: StatisticSample, b: StatisticSample) -> ComparisonReport:
    """KS statistic, W1 distance and mean gap between two statistic samples."""
    if a.values.size == 0 or b.values.size == 0:
        raise ValidationError("cannot compare empty samples")
    ks = ks_two_sample(a.values, b.values)
    w1 = w1_two_samples(a.values, b.values)
    mean_gap = abs(float(np.mean(a.values)) - float(np.mean(b.values)))
    row = {
        "n": a.metadata.get("n"),
        "ks": ks,
        "w1": w1,
        "mean_gap": mean_gap,
    }
    verdict = (
        f"KS={ks:.4f}, W1={w1:.4g}, mean gap={mean_gap:.4g} between "
        f"{a.kind} (R={a.values.size}) and {b.kind} (R={b.values.size})"
    )
    return ComparisonReport(ks, w1, mean_gap, [row], verdict)


def compare_against_limit(finite: dict[int, StatisticSample],
                          limit: StatisticSample) -> ComparisonReport:
    """Per-n comparison table against one limit sample (largest n on top-level)."""
    if not finite:
        raise ValidationError("no finite-n samples to compare")
    table = []
    last = None
    for n in sorted(finite):
        rep = compare_distributions(finite[n], limit)
        table.append(rep.table[0])
        last = rep
    verdict = (
        "KS gap by n: "
        + ", ".join(f"n={row['n']}: {row['ks']:.4f}" for row in table)
    )
    return ComparisonReport(
        last.ks_two_sample, last.w1_between_statistics, last.mean_gap, table, verdict
    )


# ---------------------------------------------------------------------------
# intermittent-map divergence probe
# ---------------------------------------------------------------------------

def divergence_probe(gamma: float, a: float, n_values: list[int], replications: int,
                     seed: int, burn_in: int = 10_000, growth_factor: float = 1.5,
                     calibration_factor: int = 10, calibration_grid_size: int = 2048,
                     threads: int = 1) -> ProbeReport:
    """Median T_n across n for the intermittent map, with a growth verdict.

    "non-stabilizing" needs strictly increasing medians with cumulative growth
    >= growth_factor; "stabilizing" needs all consecutive ratios inside
    [0.8, 1.25].
    """
    if len(n_values) < 2:
        return ProbeReport({int(n): math.nan for n in n_values}, [], "insufficient data",
                           growth_factor)
    if any(b <= a_ for a_, b in zip(n_values, n_values[1:])):
        raise ValidationError("n_values must be increasing")
    spec = IntermittentMap(gamma, a, burn_in)
    length = calibration_factor * max(n_values)
    cal_path = generate(spec, length, seed + 0x5EED, stream=0)
    reference = tabulate_cdf(
        cal_path.values, auto_calibration_grid(cal_path.values, calibration_grid_size)
    )
    medians = {}
    for i, n in enumerate(sorted(n_values)):
        t_vals = _tn_sample(spec, reference, int(n), replications, seed, i, 1e-12, threads)
        medians[int(n)] = float(np.median(t_vals))
    med_list = [medians[n] for n in sorted(medians)]
    ratios = [m2 / m1 for m1, m2 in zip(med_list, med_list[1:])]
    cumulative = med_list[-1] / med_list[0]
    if all(r > 1.0 for r in ratios) and cumulative >= growth_factor:
        verdict = "non-stabilizing"
    elif all(0.8 <= r <= 1.25 for r in ratios):
        verdict = "stabilizing"
    else:
        verdict = "indeterminate"
    return ProbeReport(medians, ratios, verdict, growth_factor)


def write_statistic_csv(sample: StatisticSample, path: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        sample.to_csv(fh)
