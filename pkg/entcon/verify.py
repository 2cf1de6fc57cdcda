"""Randomised property suites: contraction, Lipschitz continuity, the
entanglement-difference chain and the Haar sampler.

Every suite is deterministic in `(trials, seed)`; a failing result carries the
seed that reproduces it.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence

import numpy as np
from scipy import stats as scipy_stats

from .channels import (
    QuantumChannel,
    amplitude_damping_qubit,
    apply_channel,
    depolarizing_qubit,
    local_dephasing,
    sample_contraction_ratios,
    tensor_local_channels,
)
from .entanglement import (
    BipartiteSplit,
    check_entanglement_difference_chain,
    lipschitz_violation,
)
from .errors import OutOfRange
from .states import RngStream, projector, sample_haar_pure, sample_haar_pure_batch

PROPERTY_SLACK = 1e-9
KS_SIGNIFICANCE = 0.01

_logger = logging.getLogger("entcon.verify")


@dataclass(frozen=True)
class PropertyResult(object):
    name: str
    passed: bool
    trials: int
    worst_slack: float
    seed: int
    detail: str = ""


def _contraction_channels() -> List[QuantumChannel]:
    channels: List[QuantumChannel] = []
    for p in (0.2, 0.5, 0.9):
        for n in range(1, 5):
            channels.append(local_dephasing(n, p))
    channels.append(tensor_local_channels([amplitude_damping_qubit(0.3)] * 2))
    channels.append(tensor_local_channels([depolarizing_qubit(0.4)] * 2))
    return channels


def contraction_suite(trials: int, seed: int) -> List[PropertyResult]:
    results = []
    for k, ch in enumerate(_contraction_channels()):
        ratios = sample_contraction_ratios(ch, trials, RngStream(seed, k))
        worst = float(np.max(ratios)) - 1.0
        results.append(
            PropertyResult(
                name="contraction {}".format(ch.name),
                passed=worst <= PROPERTY_SLACK,
                trials=trials,
                worst_slack=worst,
                seed=seed,
                detail="max ratio {:.12f}".format(worst + 1.0),
            )
        )
    return results


def lipschitz_suite(trials: int, seed: int) -> List[PropertyResult]:
    """|N(rho) - N(omega)| <= (d_A/2) D_tr on pure and dephased pairs, 4 <= d <= 32."""
    results = []
    for n in range(2, 6):
        splits = [BipartiteSplit.least_balanced(n)]
        if n >= 4:
            splits.append(BipartiteSplit(n, frozenset([0, n - 1])))
        for split in splits:
            worst = -np.inf
            base = RngStream(seed, 100 * n + len(split.side_A))
            for t in range(trials):
                stream = base.child(t)
                chi = sample_haar_pure(2 ** n, stream)
                psi = sample_haar_pure(2 ** n, stream)
                rho, omega = projector(chi), projector(psi)
                ch = local_dephasing(n, float(stream.generator.uniform()))
                worst = max(
                    worst,
                    lipschitz_violation(rho, omega, split),
                    lipschitz_violation(
                        apply_channel(ch, rho, validate=False),
                        apply_channel(ch, omega, validate=False),
                        split,
                    ),
                )
            results.append(
                PropertyResult(
                    name="lipschitz n={} split={}".format(n, split.describe()),
                    passed=worst <= PROPERTY_SLACK,
                    trials=2 * trials,
                    worst_slack=float(worst),
                    seed=seed,
                )
            )
    return results


def chain_suite(trials: int, seed: int) -> List[PropertyResult]:
    n = 3
    ch = local_dephasing(n, 0.3)
    split = BipartiteSplit.least_balanced(n)
    worst = -np.inf
    violations = 0
    for t in range(trials):
        stream = RngStream(seed, t)
        report = check_entanglement_difference_chain(
            sample_haar_pure(2 ** n, stream),
            sample_haar_pure(2 ** n, stream),
            ch,
            split,
        )
        worst = max(worst, report.worst_slack)
        if not report.holds:
            violations += 1
    return [
        PropertyResult(
            name="chain {}".format(ch.name),
            passed=violations == 0,
            trials=trials,
            worst_slack=float(worst),
            seed=seed,
            detail="{} violations".format(violations),
        )
    ]


def haar_suite(
    trials: int, seed: int, dims: Sequence[int] = (4, 8)
) -> List[PropertyResult]:
    """Overlap with a fixed state has survival function (1 - x)^(d - 1)."""
    results = []
    for d in dims:
        amplitudes = sample_haar_pure_batch(d, RngStream(seed, d), trials)
        overlaps = np.abs(amplitudes[:, 0]) ** 2
        ks = scipy_stats.kstest(overlaps, lambda x: 1.0 - (1.0 - x) ** (d - 1))
        critical = float(scipy_stats.kstwo.ppf(1.0 - KS_SIGNIFICANCE, trials))
        results.append(
            PropertyResult(
                name="haar overlap d={}".format(d),
                passed=bool(ks.statistic < critical),
                trials=trials,
                worst_slack=float(ks.statistic - critical),
                seed=seed,
                detail="KS statistic {:.5f}, p-value {:.4f}".format(
                    ks.statistic, ks.pvalue
                ),
            )
        )
    first = sample_haar_pure(8, RngStream(seed, 0)).amplitudes.tobytes()
    second = sample_haar_pure(8, RngStream(seed, 0)).amplitudes.tobytes()
    results.append(
        PropertyResult(
            name="haar stream determinism",
            passed=first == second,
            trials=1,
            worst_slack=0.0 if first == second else 1.0,
            seed=seed,
        )
    )
    return results


SUITES: Dict[str, Callable[[int, int], List[PropertyResult]]] = {
    "contraction": contraction_suite,
    "lipschitz": lipschitz_suite,
    "chain": chain_suite,
    "haar": haar_suite,
}


def run_suite(name: str, trials: int, seed: int) -> List[PropertyResult]:
    if trials < 1:
        raise OutOfRange("trials must be at least 1")
    names = list(SUITES) if name == "all" else [name]
    results: List[PropertyResult] = []
    for suite in names:
        if suite not in SUITES:
            raise OutOfRange("unknown suite {!r}".format(suite))
        _logger.info("running %s suite (%d trials, seed %d)", suite, trials, seed)
        results.extend(SUITES[suite](trials, seed))
    return results
