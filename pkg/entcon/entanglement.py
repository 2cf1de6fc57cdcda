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
About entanglement

Negativity of a qubit register across a bipartition, N = (||rho^T_B||_tr - 1)/2,
and its Lipschitz constants with respect to the trace distance: d_A/2 for N
and d_A/(d_A - 1) for N/N_max, where d_A is the dimension of the smaller side.
"""

import logging
from dataclasses import dataclass
from typing import FrozenSet, Protocol, Tuple

from .channels import QuantumChannel, apply_channel
from .errors import DimensionMismatch, OutOfRange
from .linalg import Spectrum, hermitian_eigenvalues, partial_transpose, permute_qubits
from .states import (
    DensityMatrix,
    PureState,
    euclidean_distance,
    projector,
    trace_distance,
)
from .utils.perf import perf_point

NEGATIVITY_CLAMP = 1e-10
CHAIN_SLACK = 1e-9

_logger = logging.getLogger("entcon.entanglement")


@dataclass(frozen=True)
class BipartiteSplit(object):
    """Qubits `side_A` against the rest of an `n_qubits` register.

    Side A is always the smaller side: a larger `side_A` is replaced by its
    complement, which leaves every negativity unchanged.
    """

    n_qubits: int
    side_A: FrozenSet[int]

    def __post_init__(self) -> None:
        side = frozenset(int(q) for q in self.side_A)
        if self.n_qubits < 2:
            raise OutOfRange("a bipartition needs at least two qubits")
        if not side or len(side) >= self.n_qubits:
            raise OutOfRange("side A must be a nonempty proper subset of the register")
        if min(side) < 0 or max(side) >= self.n_qubits:
            raise OutOfRange(
                "qubit indices {} outside 0..{}".format(sorted(side), self.n_qubits - 1)
            )
        if 2 * len(side) > self.n_qubits:
            side = frozenset(range(self.n_qubits)) - side
        object.__setattr__(self, "side_A", side)

    @classmethod
    def least_balanced(cls, n_qubits: int) -> "BipartiteSplit":
        return cls(n_qubits, frozenset([0]))

    @classmethod
    def parse(cls, n_qubits: int, text: str) -> "BipartiteSplit":
        """Accept "1-vs-rest" or comma-separated qubit indices like "0,2"."""
        text = text.strip()
        if text == "1-vs-rest":
            return cls.least_balanced(n_qubits)
        try:
            indices = [int(part) for part in text.split(",") if part.strip()]
        except ValueError:
            raise OutOfRange("cannot parse split {!r}".format(text)) from None
        return cls(n_qubits, frozenset(indices))

    @property
    def side_B(self) -> FrozenSet[int]:
        return frozenset(range(self.n_qubits)) - self.side_A

    @property
    def dA(self) -> int:
        return 2 ** len(self.side_A)

    @property
    def dB(self) -> int:
        return 2 ** (self.n_qubits - len(self.side_A))

    @property
    def order(self) -> Tuple[int, ...]:
        """Qubit order that puts side A in front."""
        return tuple(sorted(self.side_A)) + tuple(sorted(self.side_B))

    def describe(self) -> str:
        return "{}|{}".format(
            ",".join(map(str, sorted(self.side_A))),
            ",".join(map(str, sorted(self.side_B))),
        )


@dataclass(frozen=True)
class LipschitzConstants(object):
    eta_N: float
    eta_N_normalized: float
    N_max: float

    @classmethod
    def for_dimension(cls, dA: int) -> "LipschitzConstants":
        return cls(
            eta_N=lipschitz_negativity(dA),
            eta_N_normalized=lipschitz_normalized_negativity(dA),
            N_max=(dA - 1) / 2.0,
        )

    @classmethod
    def for_split(cls, split: BipartiteSplit) -> "LipschitzConstants":
        return cls.for_dimension(split.dA)


def _require_dA(dA: int) -> None:
    if dA < 2:
        raise OutOfRange("d_A must be at least 2, got {}".format(dA))


def lipschitz_negativity(dA: int) -> float:
    _require_dA(dA)
    return dA / 2.0


def lipschitz_normalized_negativity(dA: int) -> float:
    _require_dA(dA)
    return dA / (dA - 1.0)


def negativity_spectrum(rho: DensityMatrix, split: BipartiteSplit) -> Spectrum:
    """Spectrum of the state partially transposed on side B."""
    if rho.dim != 2 ** split.n_qubits:
        raise DimensionMismatch(
            "state of dimension {} for a {}-qubit split".format(rho.dim, split.n_qubits)
        )
    m = rho.matrix
    if split.order != tuple(range(split.n_qubits)):
        m = permute_qubits(m, split.order)
    return hermitian_eigenvalues(partial_transpose(m, split.dA, split.dB))


@perf_point("entanglement.negativity")
def negativity(rho: DensityMatrix, split: BipartiteSplit) -> float:
    raw = (negativity_spectrum(rho, split).trace_norm() - 1.0) / 2.0
    if raw < 0.0:
        _logger.debug("raw negativity %.3e across %s", raw, split.describe())
        if raw >= -NEGATIVITY_CLAMP:
            return 0.0
        _logger.warning(
            "negativity %.3e below rounding level across %s", raw, split.describe()
        )
    return raw


def normalized_negativity(rho: DensityMatrix, split: BipartiteSplit) -> float:
    return negativity(rho, split) / LipschitzConstants.for_split(split).N_max


class EntanglementMeasure(Protocol):
    """A bipartite measure with a known trace-distance Lipschitz constant."""

    name: str

    def __call__(self, rho: DensityMatrix, split: BipartiteSplit) -> float:
        ...

    def lipschitz(self, split: BipartiteSplit) -> float:
        ...


class Negativity(object):
    name = "negativity"

    def __call__(self, rho: DensityMatrix, split: BipartiteSplit) -> float:
        return negativity(rho, split)

    def lipschitz(self, split: BipartiteSplit) -> float:
        return lipschitz_negativity(split.dA)


class NormalizedNegativity(object):
    name = "normalized_negativity"

    def __call__(self, rho: DensityMatrix, split: BipartiteSplit) -> float:
        return normalized_negativity(rho, split)

    def lipschitz(self, split: BipartiteSplit) -> float:
        return lipschitz_normalized_negativity(split.dA)


class DistanceMeasure(object):
    """Distance to the separable set; Lipschitz constant 1 for contractive distances.

    Evaluating it needs a minimisation over separable states, which this
    package does not implement.
    """

    name = "distance_to_separable"

    def __call__(self, rho: DensityMatrix, split: BipartiteSplit) -> float:
        raise NotImplementedError(
            "minimisation over the separable set is not implemented"
        )

    def lipschitz(self, split: BipartiteSplit) -> float:
        return 1.0


NEGATIVITY = Negativity()
NORMALIZED_NEGATIVITY = NormalizedNegativity()


@dataclass(frozen=True)
class ChainReport(object):
    """Terms of the chain:

        |E(rho) - E(omega)| <= eta_E D(out) <= eta_E eta_L D(in)
                            <= 2 eta_E eta_L |chi - psi|.
    """

    entanglement_difference: float
    output_bound: float
    input_bound: float
    euclidean_bound: float
    eta_E: float
    eta_channel: float
    lipschitz_holds: bool
    contraction_holds: bool
    euclidean_holds: bool

    @property
    def holds(self) -> bool:
        return self.lipschitz_holds and self.contraction_holds and self.euclidean_holds

    @property
    def worst_slack(self) -> float:
        """Largest amount by which a left side exceeds its right side."""
        return max(
            self.entanglement_difference - self.output_bound,
            self.output_bound - self.input_bound,
            self.input_bound - self.euclidean_bound,
        )


def check_entanglement_difference_chain(
    chi: PureState,
    psi: PureState,
    ch: QuantumChannel,
    split: BipartiteSplit,
    measure: EntanglementMeasure = NEGATIVITY,
    eta_channel: float = 1.0,
    slack: float = CHAIN_SLACK,
) -> ChainReport:
    for state in (chi, psi):
        if state.dim != ch.dim or state.dim != 2 ** split.n_qubits:
            raise DimensionMismatch(
                "state of dimension {} for channel dimension {} and {} qubits".format(
                    state.dim, ch.dim, split.n_qubits
                )
            )
    if not 0.0 < eta_channel <= 1.0:
        raise OutOfRange("eta_channel must lie in (0, 1]")
    rho_in, omega_in = projector(chi), projector(psi)
    rho_out = apply_channel(ch, rho_in, validate=False)
    omega_out = apply_channel(ch, omega_in, validate=False)
    eta_E = measure.lipschitz(split)

    difference = abs(measure(rho_out, split) - measure(omega_out, split))
    output_bound = eta_E * trace_distance(rho_out, omega_out)
    input_bound = eta_E * eta_channel * trace_distance(rho_in, omega_in)
    euclidean_bound = 2.0 * eta_E * eta_channel * euclidean_distance(chi, psi)
    return ChainReport(
        entanglement_difference=difference,
        output_bound=output_bound,
        input_bound=input_bound,
        euclidean_bound=euclidean_bound,
        eta_E=eta_E,
        eta_channel=eta_channel,
        lipschitz_holds=difference <= output_bound + slack,
        contraction_holds=output_bound <= input_bound + slack,
        euclidean_holds=input_bound <= euclidean_bound + slack,
    )


def lipschitz_violation(
    rho: DensityMatrix,
    omega: DensityMatrix,
    split: BipartiteSplit,
    measure: EntanglementMeasure = NEGATIVITY,
) -> float:
    """|E(rho) - E(omega)| - eta_E D_tr(rho, omega); positive means violated."""
    eta_E = measure.lipschitz(split)
    return abs(measure(rho, split) - measure(omega, split)) - eta_E * trace_distance(
        rho, omega
    )
