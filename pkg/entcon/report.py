"""Output files of a run: CSV records, JSON summaries, SVG figures, manifests.

Everything is rendered to text first and written through an `OutputSession`,
which only moves files into place once the whole run has succeeded.
"""

import csv
import hashlib
import io
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .concentration import (
    EnsembleStatistics,
    LogStdFit,
    concentration_report,
    tail_comparison,
)
from .entanglement import LipschitzConstants
from .errors import OutputError

RECORD_HEADER = ("sample_index", "negativity", "normalized_negativity")
SWEEP_HEADER = ("N", "p", "mean", "std", "n_samples")
TAIL_EPSILONS = (0.05, 0.1, 0.2, 0.3, 0.5)

_logger = logging.getLogger("entcon.report")


@dataclass(frozen=True)
class SweepRow(object):
    N: int
    p: float
    mean: float
    std: float
    n_samples: int


@dataclass
class RunManifest(object):
    command: str
    config: Dict[str, Any]
    tool_version: str
    started_at: str
    finished_at: str = ""
    output_paths: List[str] = field(default_factory=list)
    timings: Dict[str, Dict[str, float]] = field(default_factory=dict)
    experiment: Optional[Dict[str, Any]] = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))


class OutputSession(object):
    """Collects output files under temporary names until `commit`.

    Used as a context manager, the files are committed when the block exits
    normally and removed when it raises.
    """

    def __init__(self, out_dir: Path) -> None:
        self.out_dir = Path(out_dir)
        self._pending: List[Tuple[Path, Path]] = []
        self._contents: Dict[str, str] = {}
        super().__init__()

    def check(self) -> None:
        """Fail early if the output directory is, or sits under, a non-directory."""
        for path in (self.out_dir, *self.out_dir.parents):
            if path.exists():
                if not path.is_dir():
                    raise OutputError("{} exists and is not a directory".format(path))
                return

    def write(self, name: str, content: str) -> Path:
        target = self.out_dir / name
        partial = target.with_name(".{}.partial".format(target.name))
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            with open(partial, "w", encoding="utf-8", newline="") as f:
                f.write(content)
        except OSError as e:
            raise OutputError("cannot write {}: {}".format(target, e)) from e
        self._pending.append((partial, target))
        self._contents[name] = content
        return target

    @property
    def names(self) -> List[str]:
        return list(self._contents)

    def digests(self, suffix: str = ".csv") -> Dict[str, str]:
        """SHA-256 of the pending files whose name ends with `suffix`."""
        return {
            name: hashlib.sha256(content.encode("utf-8")).hexdigest()
            for name, content in self._contents.items()
            if name.endswith(suffix)
        }

    def commit(self) -> None:
        for partial, target in self._pending:
            try:
                os.replace(partial, target)
            except OSError as e:
                raise OutputError(
                    "cannot move {} into place: {}".format(target, e)
                ) from e
        _logger.info("wrote %d files to %s", len(self._pending), self.out_dir)
        self._pending = []

    def discard(self) -> None:
        for partial, _ in self._pending:
            if partial.exists():
                partial.unlink()
        self._pending = []

    def __enter__(self) -> "OutputSession":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if exc_type is None:
            self.commit()
        else:
            self.discard()


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def records_csv(stats: EnsembleStatistics) -> str:
    return _csv_text(
        RECORD_HEADER,
        [
            (
                r.sample_index,
                repr(float(r.negativity)),
                repr(float(r.normalized_negativity)),
            )
            for r in stats.records
        ],
    )


def sweep_rows(statistics: Sequence[EnsembleStatistics]) -> List[SweepRow]:
    return [SweepRow(s.n_qubits, s.p, s.mean, s.std, s.n_samples) for s in statistics]


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    return _csv_text(
        SWEEP_HEADER,
        [
            (
                r.N,
                repr(float(r.p)),
                repr(float(r.mean)),
                repr(float(r.std)),
                r.n_samples,
            )
            for r in rows
        ],
    )


def statistics_summary(
    stats: EnsembleStatistics, eta_channel: float = 1.0, eta_source: str = "universal"
) -> Dict[str, Any]:
    report = concentration_report(stats, eta_channel, eta_source)
    return {
        "n_qubits": stats.n_qubits,
        "p": stats.p,
        "split": stats.split.describe(),
        "n_samples": stats.n_samples,
        "mean": stats.mean,
        "std": stats.std,
        "normalized_mean": stats.normalized_mean,
        "normalized_std": stats.normalized_std,
        "histogram": {
            "edges": [float(e) for e in stats.histogram.edges],
            "counts": [int(c) for c in stats.histogram.counts],
        },
        "concentration": {
            "measured_variance": report.measured_variance,
            "inferred_variance": report.inferred_variance,
            "variance_ratio": report.variance_ratio,
            "eta_channel": report.eta_channel,
            "eta_source": report.eta_source,
        },
        "tail": [
            {
                "epsilon": point.epsilon,
                "empirical": point.empirical,
                "bound": point.bound,
                "informative": point.informative,
            }
            for point in tail_comparison(stats, TAIL_EPSILONS, eta_channel)
        ],
    }


def summary_json(
    statistics: Sequence[EnsembleStatistics],
    eta_channel: float = 1.0,
    eta_source: str = "universal",
) -> str:
    return (
        json.dumps(
            [statistics_summary(s, eta_channel, eta_source) for s in statistics],
            indent=2,
        )
        + "\n"
    )


def fits_json(fits: Mapping[float, Optional[LogStdFit]]) -> str:
    payload = []
    for p, fit in fits.items():
        entry: Dict[str, Any] = {"p": p}
        if fit is None:
            entry["fit"] = None
        else:
            entry["fit"] = {
                "slope": fit.slope,
                "intercept": fit.intercept,
                "r_squared": fit.r_squared,
                "N": list(fit.n_values),
            }
        payload.append(entry)
    return json.dumps(payload, indent=2) + "\n"


def _svg_text(fig: Figure) -> str:
    buf = io.StringIO()
    with matplotlib.rc_context({"svg.hashsalt": "entcon", "svg.fonttype": "none"}):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()


def histogram_svg(stats: EnsembleStatistics) -> str:
    edges, counts = stats.histogram.edges, stats.histogram.counts
    fig = Figure(figsize=(4.0, 3.0))
    ax = fig.add_subplot(1, 1, 1)
    ax.bar(edges[:-1], counts, width=np.diff(edges), align="edge", color="#4c72b0")
    ax.axvline(stats.mean, color="#c44e52", linewidth=1.0)
    ax.set_xlim(0.0, LipschitzConstants.for_split(stats.split).N_max)
    ax.set_xlabel("negativity")
    ax.set_ylabel("count")
    ax.set_title("N = {}, p = {:g}".format(stats.n_qubits, stats.p))
    fig.tight_layout()
    return _svg_text(fig)


def scaling_svg(
    rows: Sequence[SweepRow], fits: Mapping[float, Optional[LogStdFit]]
) -> str:
    """Standard deviation against N on a log axis, one series and fit line per p."""
    fig = Figure(figsize=(4.5, 3.5))
    ax = fig.add_subplot(1, 1, 1)
    for p in sorted({r.p for r in rows}):
        series = sorted((r.N, r.std) for r in rows if r.p == p and r.std > 0.0)
        if not series:
            continue
        ns = np.array([n for n, _ in series], dtype=float)
        stds = np.array([s for _, s in series])
        points = ax.plot(ns, stds, "o", label="p = {:g}".format(p))
        fit = fits.get(p)
        if fit is not None:
            ax.plot(
                ns,
                np.exp(fit.intercept + fit.slope * ns),
                "-",
                color=points[0].get_color(),
                linewidth=1.0,
            )
    ax.set_yscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel("std of negativity")
    ax.legend(fontsize="small")
    fig.tight_layout()
    return _svg_text(fig)
