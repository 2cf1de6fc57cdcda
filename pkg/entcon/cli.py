"""Command-line entry point: `entcon {sample,sweep,bound,verify,reproduce-fig2}`.

Options come from the command line, then from `--config` (a flat JSON object
keyed by option name, or a run manifest), then from built-in defaults. The
resolved options are what a run's manifest and ledger fingerprint record.
"""

import argparse
import asyncio
import json
import logging
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from . import __version__
from .channels import DecoherenceParams
from .concentration import (
    C_LEVY,
    DEFAULT_HISTOGRAM_BINS,
    EnsembleStatistics,
    ExperimentConfig,
    LogStdFit,
    bound_inferred_variance,
    equivalent_bound_inputs,
    fit_log_std_points,
    levy_bound,
    negativity_bound,
    run_ensemble,
)
from .entanglement import BipartiteSplit
from .errors import EntconError, ReproducibilityMismatch, UsageError
from .ledger import open_ledger
from .report import (
    OutputSession,
    RunManifest,
    SweepRow,
    fits_json,
    histogram_svg,
    records_csv,
    scaling_svg,
    summary_json,
    sweep_csv,
    sweep_rows,
)
from .utils import global_executor
from .utils.perf import perf_summary
from .verify import SUITES, run_suite

DEFAULT_OUTPUT_DIR = "entcon-out"
CROSS_CHECK_TOLERANCE = 1e-12
STANDARD_P_VALUES = (0.0, 0.3, 0.5)

_logger = logging.getLogger("entcon.cli")


def _float_list(value: Any) -> List[float]:
    if isinstance(value, (int, float)):
        return [float(value)]
    if isinstance(value, str):
        parts = [part for part in value.split(",") if part.strip()]
    else:
        parts = list(value)
    try:
        return [float(part) for part in parts]
    except (TypeError, ValueError):
        raise UsageError("cannot parse number list {!r}".format(value)) from None


def load_config(path: Optional[str]) -> Dict[str, Any]:
    """Read a flat option object, or the `config` object of a run manifest."""
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, ValueError) as e:
        raise UsageError("cannot read config {}: {}".format(path, e)) from None
    if not isinstance(data, dict):
        raise UsageError("config {} is not a JSON object".format(path))
    if isinstance(data.get("config"), dict) and "command" in data:
        return dict(data["config"])
    return data


class Options(object):
    """Resolves options in the order command line, config file, default.

    Every resolved value is remembered in `resolved`, which is the
    configuration a manifest stores and a ledger fingerprints.
    """

    def __init__(self, args: argparse.Namespace, config: Mapping[str, Any]) -> None:
        self.args = args
        self.config = config
        self.resolved: Dict[str, Any] = {}
        super().__init__()

    def given(self, key: str) -> bool:
        return getattr(self.args, key, None) is not None or key in self.config

    def get(
        self, key: str, default: Any = None, convert: Callable[[Any], Any] = lambda v: v
    ) -> Any:
        value = getattr(self.args, key, None)
        if value is None:
            value = self.config.get(key, default)
        if value is not None:
            try:
                value = convert(value)
            except (TypeError, ValueError):
                raise UsageError(
                    "invalid value {!r} for {}".format(value, key)
                ) from None
        self.resolved[key] = value
        return value


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _output_session(args: argparse.Namespace) -> OutputSession:
    out = Path(args.out or os.environ.get("ENTCON_OUTPUT_DIR") or DEFAULT_OUTPUT_DIR)
    session = OutputSession(out)
    session.check()
    return session


def _record_in_ledger(
    args: argparse.Namespace,
    command: str,
    config: Mapping[str, Any],
    digests: Dict[str, str],
) -> None:
    path = args.ledger or os.environ.get("ENTCON_LEDGER")
    if not path:
        return
    ledger = open_ledger(path)

    async def record() -> None:
        await ledger.record_run(command, config, digests, __version__)

    try:
        asyncio.run(record())
    finally:
        ledger.close()


def _finish(
    session: OutputSession,
    args: argparse.Namespace,
    command: str,
    opts: Options,
    started_at: str,
    experiment: Optional[Dict[str, Any]] = None,
) -> RunManifest:
    """Write the manifest, then check the CSV digests against the ledger.

    Runs inside the session, so a ledger mismatch leaves no files behind.
    """
    manifest = RunManifest(
        command=command,
        config=dict(opts.resolved),
        tool_version=__version__,
        started_at=started_at,
        finished_at=_now(),
        output_paths=sorted(session.names + ["manifest.json"]),
        timings=perf_summary(),
        experiment=experiment,
    )
    session.write("manifest.json", manifest.to_json())
    _record_in_ledger(args, command, manifest.config, session.digests())
    return manifest


def _p_values(opts: Options, default: Sequence[float]) -> Tuple[float, ...]:
    if opts.given("gamma") or opts.given("t"):
        if getattr(opts.args, "p", None) is not None:
            raise UsageError("give either --p or --gamma/--t, not both")
        gamma = opts.get("gamma", convert=float)
        times = opts.get("t", convert=_float_list)
        if gamma is None or times is None:
            raise UsageError("--gamma and --t must be given together")
        return tuple(DecoherenceParams.from_rate(gamma, t).p for t in times)
    p_values = opts.get("p", list(default), convert=_float_list)
    return tuple(DecoherenceParams.from_probability(p).p for p in p_values)


def _tag(p: float) -> str:
    return "p{:g}".format(p)


def cmd_sample(args: argparse.Namespace, config: Mapping[str, Any]) -> int:
    started_at = _now()
    opts = Options(args, config)
    n_qubits = opts.get("qubits", 3, convert=int)
    p_values = _p_values(opts, [0.0])
    split_text = opts.get("split", "1-vs-rest", convert=str)
    cfg = ExperimentConfig(
        n_qubits=n_qubits,
        p_values=p_values,
        n_samples=opts.get("samples", 1000, convert=int),
        master_seed=opts.get("seed", 0, convert=int),
        split=BipartiteSplit.parse(n_qubits, split_text),
        histogram_bins=opts.get("bins", DEFAULT_HISTOGRAM_BINS, convert=int),
    )
    session = _output_session(args)
    statistics = run_ensemble(cfg)
    with session:
        for stats in statistics:
            tag = _tag(stats.p)
            session.write("records_{}.csv".format(tag), records_csv(stats))
            session.write("histogram_{}.svg".format(tag), histogram_svg(stats))
        session.write("summary.json", summary_json(statistics))
        _finish(session, args, "sample", opts, started_at, cfg.to_dict())
    for stats in statistics:
        print(
            "N={} p={:g} split={} mean={!r} std={!r}".format(
                stats.n_qubits, stats.p, stats.split.describe(), stats.mean, stats.std
            )
        )
    return 0


def _fit_per_p(rows: Sequence[SweepRow]) -> Dict[float, Optional[LogStdFit]]:
    fits: Dict[float, Optional[LogStdFit]] = {}
    for p in sorted({r.p for r in rows}):
        series = [r for r in rows if r.p == p]
        try:
            fits[p] = fit_log_std_points(
                [r.N for r in series], [r.std for r in series], p
            )
        except EntconError as e:
            _logger.warning("no fit for p=%g: %s", p, e)
            fits[p] = None
    return fits


def _synthetic_rows(
    ns: Sequence[int], p_values: Sequence[float], n_samples: int
) -> List[SweepRow]:
    """Rows with std = exp(-N), for checking the fitting pipeline end to end."""
    return [
        SweepRow(N=n, p=p, mean=0.0, std=math.exp(-n), n_samples=n_samples)
        for p in p_values
        for n in ns
    ]


def _print_fits(fits: Mapping[float, Optional[LogStdFit]]) -> None:
    for p, fit in fits.items():
        if fit is None:
            print("p={:g} no fit".format(p))
        else:
            print(
                "p={:g} slope={!r} intercept={!r} r_squared={!r}".format(
                    p, fit.slope, fit.intercept, fit.r_squared
                )
            )


def cmd_sweep(args: argparse.Namespace, config: Mapping[str, Any]) -> int:
    started_at = _now()
    opts = Options(args, config)
    n_from = opts.get("qubits_from", 2, convert=int)
    n_to = opts.get("qubits_to", 6, convert=int)
    if n_to < n_from:
        raise UsageError("--qubits-to must not be smaller than --qubits-from")
    p_values = _p_values(opts, STANDARD_P_VALUES)
    n_samples = opts.get("samples", 1000, convert=int)
    seed = opts.get("seed", 0, convert=int)
    bins = opts.get("bins", DEFAULT_HISTOGRAM_BINS, convert=int)
    synthetic = opts.get("synthetic", None, convert=str)
    ns = list(range(n_from, n_to + 1))
    session = _output_session(args)

    if synthetic == "exp-decay":
        rows = _synthetic_rows(ns, p_values, n_samples)
    elif synthetic is None:
        statistics: List[EnsembleStatistics] = []
        for n in ns:
            statistics.extend(
                run_ensemble(ExperimentConfig(n, p_values, n_samples, seed, None, bins))
            )
        rows = sweep_rows(statistics)
    else:
        raise UsageError("unknown synthetic data {!r}".format(synthetic))

    fits = _fit_per_p(rows)
    with session:
        session.write("sweep.csv", sweep_csv(rows))
        session.write("fits.json", fits_json(fits))
        session.write("scaling.svg", scaling_svg(rows, fits))
        _finish(session, args, "sweep", opts, started_at)
    _print_fits(fits)
    return 0


def cmd_bound(args: argparse.Namespace, config: Mapping[str, Any]) -> int:
    opts = Options(args, config)
    dA = opts.get("dA", convert=int)
    dB = opts.get("dB", convert=int)
    epsilon = opts.get("epsilon", convert=float)
    if dA is None or dB is None or epsilon is None:
        raise UsageError("--dA, --dB and --epsilon are required")
    eta_channel = opts.get("eta_channel", 1.0, convert=float)
    fmt = opts.get("format", "text", convert=str)

    value = negativity_bound(epsilon, dA, dB, eta_channel)
    inputs = equivalent_bound_inputs(epsilon, dA, dB, eta_channel)
    variance = bound_inferred_variance(inputs.d, inputs.eta_E, inputs.eta_channel)
    vacuous = value > 1.0
    if vacuous:
        _logger.warning("bound %.6g exceeds 1 and says nothing", value)

    if fmt == "csv":
        print("dA,dB,epsilon,eta_channel,bound,d,eta_E,C,inferred_variance,vacuous")
        print(
            ",".join(
                str(v)
                for v in (dA, dB, epsilon, eta_channel, value, inputs.d)
                + (inputs.eta_E, C_LEVY, variance, str(vacuous).lower())
            )
        )
    else:
        print("bound: {!r}{}".format(value, "  vacuous (>1)" if vacuous else ""))
        print(
            "general bound parameters: d={} eta_E={!r} eta_channel={!r} C={!r}".format(
                inputs.d, inputs.eta_E, inputs.eta_channel, inputs.C
            )
        )
        print("bound-inferred variance: {!r}".format(variance))

    if args.cross_check:
        general = levy_bound(inputs)
        if abs(general - value) > CROSS_CHECK_TOLERANCE:
            print(
                "cross-check failed: general bound {!r} differs from {!r}".format(
                    general, value
                ),
                file=sys.stderr,
            )
            return 1
        print("cross-check: general bound agrees ({!r})".format(general))
    return 0


def cmd_verify(args: argparse.Namespace, config: Mapping[str, Any]) -> int:
    opts = Options(args, config)
    suite = opts.get("suite", "all", convert=str)
    trials = opts.get("trials", 1000, convert=int)
    seed = opts.get("seed", 0, convert=int)
    results = run_suite(suite, trials, seed)
    failed = [r for r in results if not r.passed]
    for r in results:
        print(
            "{} {} trials={} worst_slack={:.3e}{}".format(
                "PASS" if r.passed else "FAIL",
                r.name,
                r.trials,
                r.worst_slack,
                " ({})".format(r.detail) if r.detail else "",
            )
        )
    if failed:
        print(
            "{} properties violated; reproduce with: entcon verify --suite {} "
            "--trials {} --seed {}".format(len(failed), suite, trials, seed),
            file=sys.stderr,
        )
        return 1
    return 0


def cmd_reproduce_fig2(args: argparse.Namespace, config: Mapping[str, Any]) -> int:
    started_at = _now()
    opts = Options(args, config)
    fast = bool(opts.get("fast", False, convert=bool))
    n_samples = opts.get("samples", 1000 if fast else 10000, convert=int)
    seed = opts.get("seed", 0, convert=int)
    histogram_ns = (3, 5, 6) if fast else (3, 5, 8)
    sweep_ns = tuple(range(2, 7 if fast else 9))
    session = _output_session(args)

    by_n: Dict[int, List[EnsembleStatistics]] = {}
    for n in sorted(set(histogram_ns) | set(sweep_ns)):
        by_n[n] = run_ensemble(ExperimentConfig(n, STANDARD_P_VALUES, n_samples, seed))
    rows = sweep_rows([s for n in sweep_ns for s in by_n[n]])
    fits = _fit_per_p(rows)

    with session:
        for n in histogram_ns:
            for stats in by_n[n]:
                tag = "N{}_{}".format(n, _tag(stats.p))
                session.write("histogram_{}.svg".format(tag), histogram_svg(stats))
                session.write("data/records_{}.csv".format(tag), records_csv(stats))
        session.write("scaling.svg", scaling_svg(rows, fits))
        session.write("data/sweep.csv", sweep_csv(rows))
        session.write("data/fits.json", fits_json(fits))
        _finish(session, args, "reproduce-fig2", opts, started_at)
    _print_fits(fits)
    return 0


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON options file or run manifest")
    common.add_argument("--ledger", help="run ledger database (default $ENTCON_LEDGER)")
    common.add_argument("--workers", type=int, help="worker threads for sampling")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entcon",
        description="Concentration of entanglement in open quantum systems.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")
    common = _common_parser()
    commands = parser.add_subparsers(dest="command", required=True)

    sample = commands.add_parser(
        "sample", parents=[common], help="negativity distribution at fixed N"
    )
    sample.add_argument("--qubits", type=int)
    sample.add_argument("--p", help="comma-separated dephasing probabilities")
    sample.add_argument("--gamma", type=float, help="dephasing rate")
    sample.add_argument("--t", help="comma-separated times, with --gamma")
    sample.add_argument("--samples", type=int)
    sample.add_argument("--seed", type=int)
    sample.add_argument("--split", help='"1-vs-rest" or side A qubits like "0,2"')
    sample.add_argument("--bins", type=int)
    sample.add_argument("--out", help="output directory")
    sample.set_defaults(handler=cmd_sample)

    sweep = commands.add_parser(
        "sweep", parents=[common], help="standard deviation against N"
    )
    sweep.add_argument("--qubits-from", type=int)
    sweep.add_argument("--qubits-to", type=int)
    sweep.add_argument("--p")
    sweep.add_argument("--gamma", type=float)
    sweep.add_argument("--t")
    sweep.add_argument("--samples", type=int)
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--bins", type=int)
    sweep.add_argument("--synthetic", choices=["exp-decay"])
    sweep.add_argument("--out")
    sweep.set_defaults(handler=cmd_sweep)

    bound = commands.add_parser(
        "bound", parents=[common], help="evaluate the negativity tail bound"
    )
    bound.add_argument("--dA", type=int)
    bound.add_argument("--dB", type=int)
    bound.add_argument("--epsilon", type=float)
    bound.add_argument("--eta-channel", type=float)
    bound.add_argument("--format", choices=["text", "csv"])
    bound.add_argument("--cross-check", action="store_true")
    bound.set_defaults(handler=cmd_bound)

    verify = commands.add_parser(
        "verify", parents=[common], help="randomised property checks"
    )
    verify.add_argument("--suite", choices=sorted(SUITES) + ["all"])
    verify.add_argument("--trials", type=int)
    verify.add_argument("--seed", type=int)
    verify.set_defaults(handler=cmd_verify)

    reproduce = commands.add_parser(
        "reproduce-fig2",
        parents=[common],
        help="histograms at N in {3,5,8} and the std scaling plot",
    )
    reproduce.add_argument("--fast", action="store_true", default=None)
    reproduce.add_argument("--samples", type=int)
    reproduce.add_argument("--seed", type=int)
    reproduce.add_argument("--out")
    reproduce.set_defaults(handler=cmd_reproduce_fig2)
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(
        level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )


def _workers(args: argparse.Namespace) -> Optional[int]:
    """Worker count from `--workers`, else `ENTCON_WORKERS`."""
    if args.workers is not None:
        value: Any = args.workers
        source = "--workers"
    else:
        value = os.environ.get("ENTCON_WORKERS")
        source = "ENTCON_WORKERS"
        if not value:
            return None
    try:
        workers = int(value)
    except ValueError:
        raise UsageError(
            "{} must be an integer, got {!r}".format(source, value)
        ) from None
    if workers < 1:
        raise UsageError("{} must be at least 1".format(source))
    return workers


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args)
    try:
        workers = _workers(args)
        if workers is not None:
            global_executor.configure(workers)
        return args.handler(args, load_config(args.config))
    except ReproducibilityMismatch as e:
        print("entcon: {}".format(e), file=sys.stderr)
        return 1
    except EntconError as e:
        print("entcon: error: {}".format(e), file=sys.stderr)
        return 2
    finally:
        global_executor.shutdown()
