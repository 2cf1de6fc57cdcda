# Copyright (C) 2021 The Entcon Contributors
#
# This file is part of Entcon.
#
# Entcon is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# Entcon is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with Entcon.  If not, see <http://www.gnu.org/licenses/>.

"""
About concentration

An ensemble draws Haar-random pure states of an N-qubit register, evolves each
of them under local dephasing for every requested p and records the
negativity across one bipartition. Sample `i` always draws from
`RngStream(master_seed, i)`, so the records do not depend on how the samples
are spread over workers, and every p sees the same initial states.

The tail bounds are Levy-type: for a measure with Lipschitz constant eta_E,
a channel contracting trace distances by eta_L and register dimension d,

    Pr(|E - <E>| > eps) <= 4 exp(-C (2d - 1) eps^2 / (4 eta_E^2 eta_L^2))

with C = 1/(24 pi^2). The negativity form substitutes d = d_A d_B and
eta_E = d_A/(d_A - 1) for the normalized negativity.
"""

import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats as scipy_stats

from .channels import QuantumChannel, apply_channel, local_dephasing
from .entanglement import BipartiteSplit, LipschitzConstants, negativity
from .errors import DegenerateData, OutOfRange
from .states import PureState, RngStream, projector, sample_haar_pure
from .utils import global_executor
from .utils.perf import perf_point

C_LEVY = 1.0 / (24.0 * math.pi ** 2)
DEFAULT_HISTOGRAM_BINS = 50
DEFAULT_CHUNK_SIZE = 64

_logger = logging.getLogger("entcon.concentration")


@dataclass(frozen=True)
class ExperimentConfig(object):
    n_qubits: int
    p_values: Tuple[float, ...]
    n_samples: int
    master_seed: int
    split: Optional[BipartiteSplit] = None
    histogram_bins: int = DEFAULT_HISTOGRAM_BINS

    def __post_init__(self) -> None:
        if self.n_qubits < 2:
            raise OutOfRange("an ensemble needs at least two qubits")
        if self.n_samples < 1:
            raise OutOfRange("n_samples must be at least 1")
        if not self.p_values:
            raise OutOfRange("at least one p value is required")
        p_values = tuple(float(p) for p in self.p_values)
        for p in p_values:
            if not 0.0 <= p <= 1.0:
                raise OutOfRange("p = {!r} outside [0, 1]".format(p))
        if self.histogram_bins < 2:
            raise OutOfRange("histogram_bins must be at least 2")
        if not 0 <= self.master_seed < 2 ** 64:
            raise OutOfRange("master_seed must fit in 64 unsigned bits")
        split = self.split or BipartiteSplit.least_balanced(self.n_qubits)
        if split.n_qubits != self.n_qubits:
            raise OutOfRange(
                "split over {} qubits for a {}-qubit ensemble".format(
                    split.n_qubits, self.n_qubits
                )
            )
        object.__setattr__(self, "p_values", p_values)
        object.__setattr__(self, "split", split)

    @property
    def bipartition(self) -> BipartiteSplit:
        assert self.split is not None
        return self.split

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_qubits": self.n_qubits,
            "p_values": list(self.p_values),
            "n_samples": self.n_samples,
            "master_seed": self.master_seed,
            "split": sorted(self.bipartition.side_A),
            "histogram_bins": self.histogram_bins,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "ExperimentConfig":
        n_qubits = int(d["n_qubits"])
        split = d.get("split")
        return cls(
            n_qubits=n_qubits,
            p_values=tuple(d["p_values"]),
            n_samples=int(d["n_samples"]),
            master_seed=int(d["master_seed"]),
            split=BipartiteSplit(n_qubits, frozenset(split)) if split else None,
            histogram_bins=int(d.get("histogram_bins", DEFAULT_HISTOGRAM_BINS)),
        )


@dataclass(frozen=True)
class SampleRecord(object):
    sample_index: int
    negativity: float
    normalized_negativity: float


@dataclass(frozen=True, eq=False)
class Histogram(object):
    edges: np.ndarray
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(np.sum(self.counts))


@dataclass(frozen=True, eq=False)
class EnsembleStatistics(object):
    n_qubits: int
    p: float
    n_samples: int
    mean: float
    std: float
    normalized_mean: float
    normalized_std: float
    histogram: Histogram
    split: BipartiteSplit
    records: Tuple[SampleRecord, ...] = field(repr=False)

    def values(self, normalized: bool = False) -> np.ndarray:
        if normalized:
            return np.array([r.normalized_negativity for r in self.records])
        return np.array([r.negativity for r in self.records])


@dataclass(frozen=True)
class BoundInputs(object):
    epsilon: float
    d: int
    eta_E: float
    eta_channel: float = 1.0
    C: float = C_LEVY

    def __post_init__(self) -> None:
        if not self.epsilon > 0.0:
            raise OutOfRange("epsilon must be positive")
        if self.d < 1:
            raise OutOfRange("dimension must be positive")
        if not self.eta_E > 0.0:
            raise OutOfRange("eta_E must be positive")
        if not 0.0 < self.eta_channel <= 1.0:
            raise OutOfRange("eta_channel must lie in (0, 1]")
        if not self.C > 0.0:
            raise OutOfRange("C must be positive")

    @property
    def exponent(self) -> float:
        return (
            -self.C
            * (2 * self.d - 1)
            * self.epsilon ** 2
            / (4.0 * self.eta_E ** 2 * self.eta_channel ** 2)
        )


@dataclass(frozen=True)
class LogStdFit(object):
    slope: float
    intercept: float
    r_squared: float
    n_values: Tuple[int, ...]
    p: Optional[float] = None


@dataclass(frozen=True)
class TailPoint(object):
    epsilon: float
    empirical: float
    bound: float

    @property
    def informative(self) -> bool:
        return self.bound < 1.0


@dataclass(frozen=True)
class ConcentrationReport(object):
    """Measured spread of N/N_max against the spread the tail bound allows."""

    n_qubits: int
    p: float
    dA: int
    dB: int
    measured_variance: float
    inferred_variance: float
    eta_channel: float
    eta_source: str

    @property
    def variance_ratio(self) -> float:
        return self.measured_variance / self.inferred_variance


def levy_bound(b: BoundInputs) -> float:
    return 4.0 * math.exp(b.exponent)


def equivalent_bound_inputs(
    epsilon: float, dA: int, dB: int, eta_channel: float = 1.0, C: float = C_LEVY
) -> BoundInputs:
    """General-bound parameters matching the normalized-negativity bound."""
    _require_negativity_dimensions(dA, dB)
    return BoundInputs(
        epsilon=epsilon, d=dA * dB, eta_E=dA / (dA - 1.0), eta_channel=eta_channel, C=C
    )


def _require_negativity_dimensions(dA: int, dB: int) -> None:
    if dA < 2:
        raise OutOfRange("d_A must be at least 2")
    if dB < dA:
        raise OutOfRange("d_B must not be smaller than d_A")


def negativity_bound(
    epsilon: float, dA: int, dB: int, eta_channel: float = 1.0, C: float = C_LEVY
) -> float:
    _require_negativity_dimensions(dA, dB)
    if not epsilon > 0.0:
        raise OutOfRange("epsilon must be positive")
    if not 0.0 < eta_channel <= 1.0:
        raise OutOfRange("eta_channel must lie in (0, 1]")
    exponent = (
        -C
        * (2 * dA * dB - 1)
        * (dA - 1) ** 2
        / (4.0 * dA ** 2 * eta_channel ** 2)
        * epsilon ** 2
    )
    return 4.0 * math.exp(exponent)


def bound_inferred_variance(
    d: int, eta_E: float, eta_channel: float = 1.0, C: float = C_LEVY
) -> float:
    """Variance of a sub-Gaussian variable whose tail is the Levy bound.

    Matching 2 exp(-eps^2 / (2 sigma^2)) against the exponent of the bound
    gives sigma^2 = 2 eta_E^2 eta_L^2 / (C (2d - 1)).
    """
    return 2.0 * eta_E ** 2 * eta_channel ** 2 / (C * (2 * d - 1))


@perf_point("concentration.evolve_sample")
def evolve_sample(
    psi: PureState, channels: Sequence[QuantumChannel], split: BipartiteSplit
) -> List[Tuple[float, float]]:
    """Negativity and normalized negativity of one initial state under each channel."""
    n_max = LipschitzConstants.for_split(split).N_max
    rho0 = projector(psi)
    results = []
    for ch in channels:
        value = negativity(apply_channel(ch, rho0, validate=False), split)
        results.append((value, value / n_max))
    return results


def _evolve_chunk(
    cfg: ExperimentConfig, channels: Sequence[QuantumChannel], indices: range
) -> List[List[Tuple[float, float]]]:
    dim = 2 ** cfg.n_qubits
    return [
        evolve_sample(
            sample_haar_pure(dim, RngStream(cfg.master_seed, i)),
            channels,
            cfg.bipartition,
        )
        for i in indices
    ]


def summarize_records(
    n_qubits: int,
    p: float,
    split: BipartiteSplit,
    records: Sequence[SampleRecord],
    histogram_bins: int = DEFAULT_HISTOGRAM_BINS,
) -> EnsembleStatistics:
    if not records:
        raise DegenerateData("no records to summarize")
    values = np.array([r.negativity for r in records])
    normalized = np.array([r.normalized_negativity for r in records])
    n_max = LipschitzConstants.for_split(split).N_max
    ddof = 1 if len(records) > 1 else 0
    counts, edges = np.histogram(
        np.clip(values, 0.0, n_max), bins=histogram_bins, range=(0.0, n_max)
    )
    return EnsembleStatistics(
        n_qubits=n_qubits,
        p=p,
        n_samples=len(records),
        mean=float(np.mean(values)),
        std=float(np.std(values, ddof=ddof)),
        normalized_mean=float(np.mean(normalized)),
        normalized_std=float(np.std(normalized, ddof=ddof)),
        histogram=Histogram(edges, counts),
        split=split,
        records=tuple(records),
    )


def run_ensemble(
    cfg: ExperimentConfig,
    executor: Optional[Executor] = None,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> List[EnsembleStatistics]:
    """One `EnsembleStatistics` per p of `cfg`, in the order of `cfg.p_values`."""
    channels = [local_dephasing(cfg.n_qubits, p) for p in cfg.p_values]
    executor = executor or global_executor.get()
    chunks = [
        range(start, min(start + chunk_size, cfg.n_samples))
        for start in range(0, cfg.n_samples, chunk_size)
    ]
    _logger.info(
        "sampling %d states of %d qubits across %s for p in %s",
        cfg.n_samples,
        cfg.n_qubits,
        cfg.bipartition.describe(),
        list(cfg.p_values),
    )
    per_sample: List[List[Tuple[float, float]]] = []
    for chunk_result in executor.map(partial(_evolve_chunk, cfg, channels), chunks):
        per_sample.extend(chunk_result)

    statistics = []
    for j, p in enumerate(cfg.p_values):
        records = [
            SampleRecord(i, values[j][0], values[j][1])
            for i, values in enumerate(per_sample)
        ]
        stats = summarize_records(
            cfg.n_qubits, p, cfg.bipartition, records, cfg.histogram_bins
        )
        _logger.info(
            "N=%d p=%g: mean %.6f std %.6f", cfg.n_qubits, p, stats.mean, stats.std
        )
        statistics.append(stats)
    return statistics


def empirical_tail(
    stats: EnsembleStatistics, epsilon: float, normalized: bool = False
) -> float:
    """Fraction of records farther than `epsilon` from the ensemble mean."""
    values = stats.values(normalized)
    mean = stats.normalized_mean if normalized else stats.mean
    return float(np.mean(np.abs(values - mean) > epsilon))


def tail_comparison(
    stats: EnsembleStatistics, epsilons: Sequence[float], eta_channel: float = 1.0
) -> List[TailPoint]:
    """Empirical tail of N/N_max against the negativity bound on an epsilon grid."""
    split = stats.split
    return [
        TailPoint(
            epsilon=eps,
            empirical=empirical_tail(stats, eps, normalized=True),
            bound=negativity_bound(eps, split.dA, split.dB, eta_channel),
        )
        for eps in epsilons
    ]


def fit_log_std_points(
    ns: Sequence[int], stds: Sequence[float], p: Optional[float] = None
) -> LogStdFit:
    """Least-squares line through (N, ln std)."""
    if len(ns) != len(stds):
        raise DegenerateData("{} sizes for {} deviations".format(len(ns), len(stds)))
    if len(ns) < 3:
        raise DegenerateData("a fit needs at least 3 points, got {}".format(len(ns)))
    if len(set(ns)) < 2:
        raise DegenerateData("a fit needs at least two distinct system sizes")
    std_array = np.asarray(stds, dtype=float)
    if not np.all(np.isfinite(std_array)) or np.any(std_array <= 0.0):
        raise DegenerateData("standard deviations must be positive and finite")
    x = np.asarray(ns, dtype=float)
    y = np.log(std_array)
    result = scipy_stats.linregress(x, y)
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else float(result.rvalue) ** 2
    return LogStdFit(
        slope=float(result.slope),
        intercept=float(result.intercept),
        r_squared=r_squared,
        n_values=tuple(int(n) for n in ns),
        p=p,
    )


def fit_log_std(stats_by_N: Sequence[EnsembleStatistics]) -> LogStdFit:
    ps = {s.p for s in stats_by_N}
    if len(ps) > 1:
        raise DegenerateData("statistics at different p values: {}".format(sorted(ps)))
    return fit_log_std_points(
        [s.n_qubits for s in stats_by_N],
        [s.std for s in stats_by_N],
        p=ps.pop() if ps else None,
    )


def concentration_report(
    stats: EnsembleStatistics,
    eta_channel: float = 1.0,
    eta_source: str = "universal",
    C: float = C_LEVY,
) -> ConcentrationReport:
    split = stats.split
    inputs = equivalent_bound_inputs(1.0, split.dA, split.dB, eta_channel, C)
    return ConcentrationReport(
        n_qubits=stats.n_qubits,
        p=stats.p,
        dA=split.dA,
        dB=split.dB,
        measured_variance=stats.normalized_std ** 2,
        inferred_variance=bound_inferred_variance(
            inputs.d, inputs.eta_E, inputs.eta_channel, inputs.C
        ),
        eta_channel=eta_channel,
        eta_source=eta_source,
    )
