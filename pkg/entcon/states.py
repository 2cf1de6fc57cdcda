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
About states

Pure states are sampled on the full complex sphere: a vector of independent
complex Gaussians, normalised. Every quantity computed downstream goes through
`projector`, which drops the global phase, so fixing the first component real
would not change any distribution.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Tuple

import numpy as np

from .errors import (
    DegenerateDraw,
    DimensionMismatch,
    InvalidState,
    NotHermitian,
    OutOfRange,
)
from .linalg import (
    TOLERANCES,
    ComplexMatrix,
    Spectrum,
    as_matrix,
    hermitian_eigenvalues,
    hermiticity_residual,
    matmul,
    scale,
    trace,
    trace_norm_hermitian,
)

TRACE_TOLERANCE = 1e-10
HAAR_MIN_NORM = 1e-100
HAAR_REDRAW_LIMIT = 10

_logger = logging.getLogger("entcon.states")


@dataclass(frozen=True)
class RngStream(object):
    """A reproducible random stream keyed by `(master_seed, stream_index, path)`.

    The generator is a counter-based Philox stream; the key goes into the
    spawn key of a `SeedSequence`, so streams with different keys are
    independent and a key always replays the same draws. A stream carries
    draw state and belongs to one worker at a time.
    """

    master_seed: int
    stream_index: int
    path: Tuple[int, ...] = ()
    generator: np.random.Generator = field(
        init=False, repr=False, compare=False, hash=False
    )

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < 2 ** 64:
            raise OutOfRange("master_seed must fit in 64 unsigned bits")
        if self.stream_index < 0 or any(i < 0 for i in self.path):
            raise OutOfRange("stream indices must be non-negative")
        sequence = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.stream_index,) + tuple(self.path)
        )
        object.__setattr__(
            self, "generator", np.random.Generator(np.random.Philox(sequence))
        )

    def child(self, index: int) -> "RngStream":
        return RngStream(self.master_seed, self.stream_index, self.path + (index,))

    def standard_normal(self, size: Any) -> np.ndarray:
        return self.generator.standard_normal(size)


@dataclass(frozen=True, eq=False)
class PureState(object):
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.amplitudes, dtype=np.complex128, copy=True)
        if v.ndim != 1 or v.size < 1:
            raise DimensionMismatch("amplitudes must be a non-empty vector")
        if not np.all(np.isfinite(v)):
            raise InvalidState("amplitudes must be finite")
        norm_sq = float(np.vdot(v, v).real)
        if abs(norm_sq - 1.0) > TOLERANCES.tol_norm:
            raise InvalidState("squared norm {!r} is not 1".format(norm_sq))
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @property
    def dim(self) -> int:
        return int(self.amplitudes.shape[0])

    @classmethod
    def from_amplitudes(cls, values: Any, normalize: bool = False) -> "PureState":
        v = np.asarray(values, dtype=np.complex128)
        if normalize:
            norm = np.linalg.norm(v)
            if norm == 0.0:
                raise InvalidState("cannot normalise the zero vector")
            v = v / norm
        return cls(v)

    @classmethod
    def basis(cls, dim: int, index: int) -> "PureState":
        if not 0 <= index < dim:
            raise OutOfRange("basis index {} outside dimension {}".format(index, dim))
        v = np.zeros(dim, dtype=np.complex128)
        v[index] = 1.0
        return cls(v)

    def with_phase(self, theta: float) -> "PureState":
        return PureState(np.exp(1j * theta) * self.amplitudes)

    def evolve(self, unitary: ComplexMatrix) -> "PureState":
        u = as_matrix(unitary)
        if u.shape[0] != self.dim:
            raise DimensionMismatch(
                "unitary of dimension {} on a state of dimension {}".format(
                    u.shape[0], self.dim
                )
            )
        return PureState.from_amplitudes(u @ self.amplitudes, normalize=True)


@dataclass(frozen=True, eq=False)
class DensityMatrix(object):
    """Hermitian, unit-trace matrix.

    Hermiticity and trace are checked on construction. Positivity costs an
    eigendecomposition and is checked by `validate`.
    """

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(as_matrix(self.matrix), copy=True)
        residual = hermiticity_residual(m)
        if residual > TOLERANCES.tol_herm:
            raise NotHermitian("density matrix off by {:.3e}".format(residual))
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_TOLERANCE:
            raise InvalidState("trace {!r} is not 1".format(tr))
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(scale(np.eye(dim, dtype=np.complex128), 1.0 / dim))

    def spectrum(self) -> Spectrum:
        return hermitian_eigenvalues(self.matrix)

    def validate(self, tol_psd: float = TOLERANCES.tol_psd) -> "DensityMatrix":
        lowest = self.spectrum().min()
        if lowest < -tol_psd:
            raise InvalidState(
                "minimum eigenvalue {:.3e} below -{:.1e}".format(lowest, tol_psd)
            )
        return self

    def clamped_spectrum(self) -> np.ndarray:
        """Spectrum for reporting; the stored matrix is never rewritten."""
        return self.spectrum().clamped(TOLERANCES.tol_psd)

    def purity(self) -> float:
        return float(np.real(trace(matmul(self.matrix, self.matrix))))


def _require_same_dim(a: Any, b: Any) -> None:
    if a.dim != b.dim:
        raise DimensionMismatch("dimensions {} and {} differ".format(a.dim, b.dim))


def sample_haar_pure(dim: int, rng: RngStream) -> PureState:
    if dim < 2:
        raise OutOfRange("dimension must be at least 2, got {}".format(dim))
    for attempt in range(HAAR_REDRAW_LIMIT):
        raw = rng.standard_normal(2 * dim)
        v = raw[:dim] + 1j * raw[dim:]
        norm = np.linalg.norm(v)
        if norm >= HAAR_MIN_NORM:
            return PureState(v / norm)
        _logger.debug(
            "degenerate gaussian draw on stream %r (attempt %d)", rng, attempt
        )
    raise DegenerateDraw(
        "{} consecutive degenerate draws on {!r}".format(HAAR_REDRAW_LIMIT, rng)
    )


def sample_haar_pure_batch(dim: int, rng: RngStream, size: int) -> np.ndarray:
    """`size` Haar-random unit vectors as the rows of an array."""
    if dim < 2:
        raise OutOfRange("dimension must be at least 2, got {}".format(dim))
    raw = rng.standard_normal((size, 2 * dim))
    v = raw[:, :dim] + 1j * raw[:, dim:]
    norms = np.linalg.norm(v, axis=1)
    for row in np.flatnonzero(norms < HAAR_MIN_NORM):
        v[row] = sample_haar_pure(dim, rng).amplitudes
        norms[row] = 1.0
    return v / norms[:, None]


def projector(psi: PureState) -> DensityMatrix:
    v = psi.amplitudes
    return DensityMatrix(np.outer(v, v.conj()))


def trace_distance(rho: DensityMatrix, omega: DensityMatrix) -> float:
    _require_same_dim(rho, omega)
    return trace_norm_hermitian(rho.matrix - omega.matrix)


def euclidean_distance(psi: PureState, chi: PureState) -> float:
    _require_same_dim(psi, chi)
    return float(np.linalg.norm(psi.amplitudes - chi.amplitudes))


def overlap_squared(phi: PureState, psi: PureState) -> float:
    _require_same_dim(phi, psi)
    return float(abs(np.vdot(phi.amplitudes, psi.amplitudes)) ** 2)


def pure_trace_distance(psi: PureState, chi: PureState) -> float:
    """Closed form 2 sqrt(1 - |<psi|chi>|^2) for two pure states."""
    return 2.0 * float(np.sqrt(max(0.0, 1.0 - overlap_squared(psi, chi))))
