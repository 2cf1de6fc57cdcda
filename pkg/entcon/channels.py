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
About channels

A channel is a list of Kraus operators. `LocalProductChannel` keeps the
single-qubit factors of a local channel and applies them one qubit at a time;
its full Kraus set (one operator per choice of factor operators) is only built
when something asks for `kraus_ops`.

The dephasing model is the phase-damping pair K0 = diag(1, sqrt(1-p)),
K1 = diag(0, sqrt(p)). Amplitude damping and depolarizing channels are
extensions beyond that model, kept to run the same checks on other noise.
"""

import itertools
import logging
from concurrent.futures import Executor
from dataclasses import dataclass
from functools import reduce
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DegeneratePair,
    DimensionMismatch,
    InvalidChannel,
    NotUnitary,
    OutOfRange,
)
from .linalg import (
    ComplexMatrix,
    add,
    adjoint,
    as_matrix,
    is_unitary,
    matmul,
    partial_trace,
    scale,
)
from .states import (
    DensityMatrix,
    RngStream,
    projector,
    sample_haar_pure,
    trace_distance,
)
from .utils import global_executor
from .utils.perf import perf_point

COMPLETENESS_TOLERANCE = 1e-12
UNITARY_TOLERANCE = 1e-10
DEGENERATE_DISTANCE = 1e-12
PAIR_REDRAW_LIMIT = 10

_logger = logging.getLogger("entcon.channels")


def _freeze(m: ComplexMatrix) -> np.ndarray:
    m = np.array(as_matrix(m), copy=True)
    m.setflags(write=False)
    return m


def _completeness_residual(kraus_ops: Sequence[np.ndarray]) -> float:
    dim = kraus_ops[0].shape[0]
    total = sum(matmul(adjoint(k), k) for k in kraus_ops)
    return float(np.max(np.abs(add(total, scale(np.eye(dim), -1.0)))))


class QuantumChannel(object):
    """A completely positive trace-preserving map in Kraus form."""

    def __init__(
        self, kraus_ops: Sequence[ComplexMatrix], name: str = "channel"
    ) -> None:
        ops = tuple(_freeze(k) for k in kraus_ops)
        if not ops:
            raise InvalidChannel("a channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        for k in ops:
            if k.shape != (dim, dim):
                raise DimensionMismatch(
                    "Kraus operators of shapes {} and {}".format(ops[0].shape, k.shape)
                )
        residual = _completeness_residual(ops)
        if residual > COMPLETENESS_TOLERANCE:
            raise InvalidChannel(
                "completeness violated by {:.3e} in {}".format(residual, name)
            )
        self._kraus_ops: Optional[Tuple[np.ndarray, ...]] = ops
        self.name = name
        super().__init__()

    @property
    def dim(self) -> int:
        return int(self.kraus_ops[0].shape[0])

    @property
    def kraus_ops(self) -> Tuple[np.ndarray, ...]:
        assert self._kraus_ops is not None
        return self._kraus_ops

    def completeness_residual(self) -> float:
        return _completeness_residual(self.kraus_ops)

    def apply_matrix(self, m: np.ndarray) -> np.ndarray:
        stack = np.stack(self.kraus_ops)
        return np.einsum("kij,jl,kml->im", stack, m, stack.conj(), optimize=True)

    def __repr__(self) -> str:
        return "<{} {} dim={}>".format(type(self).__name__, self.name, self.dim)


class LocalProductChannel(QuantumChannel):
    def __init__(
        self, factors: Sequence[QuantumChannel], name: Optional[str] = None
    ) -> None:
        if not factors:
            raise InvalidChannel("a local channel needs at least one factor")
        for factor in factors:
            if factor.dim != 2:
                raise DimensionMismatch(
                    "local factors act on one qubit, got dimension {}".format(
                        factor.dim
                    )
                )
        self.factors: Tuple[QuantumChannel, ...] = tuple(factors)
        self.name = name or " (x) ".join(f.name for f in self.factors)
        self._kraus_ops = None

    @property
    def n_qubits(self) -> int:
        return len(self.factors)

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    @property
    def kraus_ops(self) -> Tuple[np.ndarray, ...]:
        if self._kraus_ops is None:
            self._kraus_ops = tuple(
                _freeze(reduce(np.kron, combination))
                for combination in itertools.product(
                    *(f.kraus_ops for f in self.factors)
                )
            )
        return self._kraus_ops

    def apply_matrix(self, m: np.ndarray) -> np.ndarray:
        n = self.n_qubits
        out = m
        for k, factor in enumerate(self.factors):
            left, right = 2 ** k, 2 ** (n - k - 1)
            blocks = out.reshape(left, 2, right, left, 2, right)
            out = sum(
                np.einsum("ij,ajbckd,lk->aibcld", K, blocks, K.conj())
                for K in factor.kraus_ops
            ).reshape(m.shape)
        return out


@dataclass(frozen=True)
class DecoherenceParams(object):
    """Time of a Markovian decoherence process as the probability p."""

    p: float
    gamma: Optional[float] = None
    t: Optional[float] = None

    def __post_init__(self) -> None:
        _require_probability(self.p)
        if self.gamma is not None and self.t is not None:
            if abs(self.p - markov_p(self.gamma, self.t)) > 1e-12:
                raise OutOfRange("p does not match 1 - exp(-gamma t)")

    @classmethod
    def from_rate(cls, gamma: float, t: float) -> "DecoherenceParams":
        return cls(markov_p(gamma, t), gamma, t)

    @classmethod
    def from_probability(cls, p: float) -> "DecoherenceParams":
        return cls(p)


@dataclass(frozen=True, eq=False)
class Dilation(object):
    """Unitary `U` on system (x) environment with the environment in `env_state`."""

    dS: int
    dE: int
    unitary: np.ndarray
    env_state: DensityMatrix

    def __post_init__(self) -> None:
        u = _freeze(self.unitary)
        if u.shape[0] != self.dS * self.dE:
            raise DimensionMismatch(
                "unitary of dimension {} for {} x {}".format(
                    u.shape[0], self.dS, self.dE
                )
            )
        if self.env_state.dim != self.dE:
            raise DimensionMismatch(
                "environment state of dimension {}, expected {}".format(
                    self.env_state.dim, self.dE
                )
            )
        if not is_unitary(u, UNITARY_TOLERANCE):
            raise NotUnitary("dilation operator is not unitary")
        object.__setattr__(self, "unitary", u)

    def to_channel(self) -> QuantumChannel:
        """Kraus form sqrt(l_j) (I (x) <k|) U (I (x) |e_j>) of the same map."""
        weights, vectors = np.linalg.eigh(self.env_state.matrix)
        blocks = self.unitary.reshape(self.dS, self.dE, self.dS, self.dE)
        ops: List[np.ndarray] = []
        for weight, e in zip(weights, vectors.T):
            if weight <= 0.0:
                continue
            for k in range(self.dE):
                ops.append(np.sqrt(weight) * (blocks[:, k, :, :] @ e))
        return QuantumChannel(ops, name="dilated")


def _require_probability(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise OutOfRange("probability {!r} outside [0, 1]".format(p))


def markov_p(gamma: float, t: float) -> float:
    if not (np.isfinite(gamma) and gamma >= 0.0):
        raise OutOfRange("decay rate must be finite and >= 0, got {!r}".format(gamma))
    if not (t >= 0.0):
        raise OutOfRange("time must be >= 0, got {!r}".format(t))
    if gamma == 0.0:
        return 0.0
    return float(-np.expm1(-gamma * t))


def identity_channel(dim: int) -> QuantumChannel:
    return QuantumChannel([np.eye(dim)], name="identity")


def dephasing_qubit(p: float) -> QuantumChannel:
    _require_probability(p)
    return QuantumChannel(
        [np.diag([1.0, np.sqrt(1.0 - p)]), np.diag([0.0, np.sqrt(p)])],
        name="dephasing({:g})".format(p),
    )


def amplitude_damping_qubit(gamma: float) -> QuantumChannel:
    _require_probability(gamma)
    return QuantumChannel(
        [
            np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]]),
            np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]]),
        ],
        name="amplitude_damping({:g})".format(gamma),
    )


def depolarizing_qubit(p: float) -> QuantumChannel:
    """rho -> (1 - p) rho + p I/2."""
    _require_probability(p)
    paulis = [
        np.array([[0.0, 1.0], [1.0, 0.0]]),
        np.array([[0.0, -1j], [1j, 0.0]]),
        np.array([[1.0, 0.0], [0.0, -1.0]]),
    ]
    return QuantumChannel(
        [np.sqrt(1.0 - 0.75 * p) * np.eye(2)] + [np.sqrt(p / 4.0) * s for s in paulis],
        name="depolarizing({:g})".format(p),
    )


def tensor_local_channels(per_qubit: Sequence[QuantumChannel]) -> LocalProductChannel:
    return LocalProductChannel(per_qubit)


def local_dephasing(n_qubits: int, p: float) -> LocalProductChannel:
    if n_qubits < 1:
        raise OutOfRange("need at least one qubit")
    factor = dephasing_qubit(p)
    return LocalProductChannel(
        [factor] * n_qubits, name="dephasing({:g})^{}".format(p, n_qubits)
    )


def compose(first: QuantumChannel, second: QuantumChannel) -> QuantumChannel:
    """The channel applying `first`, then `second`."""
    if first.dim != second.dim:
        raise DimensionMismatch(
            "cannot compose dimensions {} and {}".format(first.dim, second.dim)
        )
    name = "{} then {}".format(first.name, second.name)
    if isinstance(first, LocalProductChannel) and isinstance(
        second, LocalProductChannel
    ):
        return LocalProductChannel(
            [compose(a, b) for a, b in zip(first.factors, second.factors)], name=name
        )
    return QuantumChannel(
        [b @ a for a in first.kraus_ops for b in second.kraus_ops], name=name
    )


@perf_point("channels.apply_channel")
def apply_channel(
    ch: QuantumChannel, rho: DensityMatrix, validate: bool = True
) -> DensityMatrix:
    if rho.dim != ch.dim:
        raise DimensionMismatch(
            "channel of dimension {} on a state of dimension {}".format(ch.dim, rho.dim)
        )
    out = DensityMatrix(ch.apply_matrix(rho.matrix))
    if validate:
        out.validate()
    return out


def apply_dilation(d: Dilation, rho: DensityMatrix) -> DensityMatrix:
    if rho.dim != d.dS:
        raise DimensionMismatch(
            "dilation of system dimension {} on a state of dimension {}".format(
                d.dS, rho.dim
            )
        )
    joint = np.kron(rho.matrix, d.env_state.matrix)
    evolved = d.unitary @ joint @ d.unitary.conj().T
    return DensityMatrix(partial_trace(evolved, d.dS, d.dE, traced_last=True))


def dephasing_dilation(p: float) -> Dilation:
    """Controlled rotation of an environment qubit by theta, sin^2(theta) = p."""
    _require_probability(p)
    theta = np.arcsin(np.sqrt(p))
    rotation = np.array(
        [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
    )
    unitary = np.kron(np.diag([1.0, 0.0]), np.eye(2)) + np.kron(
        np.diag([0.0, 1.0]), rotation
    )
    env = DensityMatrix(np.diag([1.0, 0.0]))
    return Dilation(2, 2, unitary, env)


def swap_dilation(env_state: DensityMatrix) -> Dilation:
    """Exchange the system with an environment of the same dimension."""
    dim = env_state.dim
    swap = np.zeros((dim * dim, dim * dim))
    for i in range(dim):
        for k in range(dim):
            swap[k * dim + i, i * dim + k] = 1.0
    return Dilation(dim, dim, swap, env_state)


def contraction_ratio(
    ch: QuantumChannel, rho: DensityMatrix, omega: DensityMatrix
) -> float:
    before = trace_distance(rho, omega)
    if before < DEGENERATE_DISTANCE:
        raise DegeneratePair("input trace distance {:.3e}".format(before))
    after = trace_distance(
        apply_channel(ch, rho, validate=False), apply_channel(ch, omega, validate=False)
    )
    return after / before


def _pair_ratio(ch: QuantumChannel, stream: RngStream) -> float:
    for attempt in range(PAIR_REDRAW_LIMIT):
        rho = projector(sample_haar_pure(ch.dim, stream))
        omega = projector(sample_haar_pure(ch.dim, stream))
        try:
            return contraction_ratio(ch, rho, omega)
        except DegeneratePair:
            _logger.debug(
                "redrawing degenerate pair on %r (attempt %d)", stream, attempt
            )
    raise DegeneratePair(
        "{} consecutive degenerate pairs on {!r}".format(PAIR_REDRAW_LIMIT, stream)
    )


def sample_contraction_ratios(
    ch: QuantumChannel,
    n_pairs: int,
    rng: RngStream,
    executor: Optional[Executor] = None,
) -> np.ndarray:
    """Trace-distance ratios of `n_pairs` random pure pairs.

    Pair i is drawn from `rng.child(i)`.
    """
    if n_pairs < 1:
        raise OutOfRange("n_pairs must be at least 1")
    executor = executor or global_executor.get()
    return np.fromiter(
        executor.map(lambda i: _pair_ratio(ch, rng.child(i)), range(n_pairs)),
        dtype=float,
        count=n_pairs,
    )


def estimate_contraction(
    ch: QuantumChannel,
    n_pairs: int,
    rng: RngStream,
    executor: Optional[Executor] = None,
) -> float:
    """Sampled lower bound on the contraction coefficient of `ch`."""
    estimate = float(np.max(sample_contraction_ratios(ch, n_pairs, rng, executor)))
    _logger.debug("contraction of %r estimated at %.12f", ch, estimate)
    return estimate
