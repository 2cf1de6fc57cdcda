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
About linalg

Dense complex matrices are plain `numpy.ndarray` objects of dtype complex128.
Tensor factors are ordered most-significant first: qubit 0 is the leftmost
factor, so a two-qubit index reads `i * dB + k`.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotHermitian, OutOfRange

ComplexMatrix = np.ndarray

JACOBI_SWEEP_LIMIT = 100
JACOBI_OFF_THRESHOLD = 1e-12

_logger = logging.getLogger("entcon.linalg")


@dataclass(frozen=True)
class Tolerances(object):
    tol_herm: float = 1e-10
    tol_psd: float = 1e-9
    tol_norm: float = 1e-12


TOLERANCES = Tolerances()


@dataclass(frozen=True, eq=False)
class Spectrum(object):
    """Eigenvalues of a Hermitian matrix, sorted ascending."""

    eigenvalues: np.ndarray

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def trace_norm(self) -> float:
        return float(np.sum(np.abs(self.eigenvalues)))

    def min(self) -> float:
        return float(self.eigenvalues[0])

    def clamped(self, tol: float = TOLERANCES.tol_psd) -> np.ndarray:
        """Copy with negative rounding in [-tol, 0) set to zero."""
        values = np.array(self.eigenvalues, copy=True)
        values[(values < 0.0) & (values >= -tol)] = 0.0
        return values


def as_matrix(obj: Any) -> ComplexMatrix:
    m = np.asarray(obj, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionMismatch(
            "expected a non-empty square matrix, got shape {}".format(m.shape)
        )
    if not np.all(np.isfinite(m)):
        raise OutOfRange("matrix has non-finite entries")
    return m


def _require_same_shape(a: ComplexMatrix, b: ComplexMatrix) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch("shapes {} and {} differ".format(a.shape, b.shape))


def hermiticity_residual(m: ComplexMatrix) -> float:
    m = as_matrix(m)
    return float(np.max(np.abs(m - adjoint(m))))


def is_hermitian(m: ComplexMatrix, tol: float = TOLERANCES.tol_herm) -> bool:
    return hermiticity_residual(m) <= tol


def is_unitary(m: ComplexMatrix, tol: float = 1e-10) -> bool:
    m = as_matrix(m)
    residual = matmul(adjoint(m), m) - np.eye(m.shape[0])
    return bool(np.max(np.abs(residual)) <= tol)


def _require_hermitian(m: ComplexMatrix, tol: float) -> None:
    residual = hermiticity_residual(m)
    if residual > tol:
        raise NotHermitian(
            "max |M - M^dagger| = {:.3e} exceeds {:.1e}".format(residual, tol)
        )


def _off_diagonal_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def _jacobi(
    m: ComplexMatrix, want_vectors: bool
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Cyclic Jacobi sweeps for a complex Hermitian matrix.

    Each rotation first removes the phase of `a[p, q]` and then applies the
    real symmetric 2x2 rotation that annihilates it, so `a` stays Hermitian.
    """
    a = np.array(m, dtype=np.complex128, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128) if want_vectors else None
    magnitude = float(np.linalg.norm(a))
    if n == 1 or magnitude == 0.0:
        return np.real(np.diag(a)).copy(), v
    threshold = JACOBI_OFF_THRESHOLD * magnitude
    for sweep in range(JACOBI_SWEEP_LIMIT):
        if _off_diagonal_norm(a) <= threshold:
            _logger.debug("jacobi converged after %d sweeps (n=%d)", sweep, n)
            return np.real(np.diag(a)).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                magnitude = abs(apq)
                if magnitude == 0.0:
                    continue
                phase = np.conj(apq / magnitude)
                tau = (a[q, q].real - a[p, p].real) / (2.0 * magnitude)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                g = np.array([[c, s], [-s * phase, c * phase]], dtype=np.complex128)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = 0.0
                a[q, p] = 0.0
                if v is not None:
                    v[:, idx] = v[:, idx] @ g
    if _off_diagonal_norm(a) <= threshold:
        return np.real(np.diag(a)).copy(), v
    raise NoConvergence(
        "jacobi did not converge within {} sweeps".format(JACOBI_SWEEP_LIMIT)
    )


def hermitian_eigenvalues(
    m: ComplexMatrix, method: str = "lapack", tol: float = TOLERANCES.tol_herm
) -> Spectrum:
    m = as_matrix(m)
    _require_hermitian(m, tol)
    if method == "lapack":
        values = np.linalg.eigvalsh(m)
    elif method == "jacobi":
        values, _ = _jacobi(m, want_vectors=False)
    else:
        raise OutOfRange("unknown eigensolver method: {!r}".format(method))
    return Spectrum(np.sort(values))


def hermitian_eigh(
    m: ComplexMatrix, method: str = "lapack", tol: float = TOLERANCES.tol_herm
) -> Tuple[Spectrum, np.ndarray]:
    """Eigenvalues (ascending) and the matching eigenvectors as columns."""
    m = as_matrix(m)
    _require_hermitian(m, tol)
    if method == "lapack":
        values, vectors = np.linalg.eigh(m)
    elif method == "jacobi":
        values, vectors = _jacobi(m, want_vectors=True)
        assert vectors is not None
    else:
        raise OutOfRange("unknown eigensolver method: {!r}".format(method))
    order = np.argsort(values)
    return Spectrum(values[order]), vectors[:, order]


def trace_norm_hermitian(
    m: ComplexMatrix, method: str = "lapack", tol: float = TOLERANCES.tol_herm
) -> float:
    return hermitian_eigenvalues(m, method=method, tol=tol).trace_norm()


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    return np.kron(as_matrix(a), as_matrix(b))


def partial_transpose(m: ComplexMatrix, dA: int, dB: int) -> ComplexMatrix:
    """Transpose the second tensor factor: PT[(i,k),(j,l)] = M[(i,l),(j,k)]."""
    m = as_matrix(m)
    if dA < 1 or dB < 1 or m.shape[0] != dA * dB:
        raise DimensionMismatch(
            "matrix of dimension {} is not {} x {}".format(m.shape[0], dA, dB)
        )
    return m.reshape(dA, dB, dA, dB).transpose(0, 3, 2, 1).reshape(dA * dB, dA * dB)


def partial_trace(
    m: ComplexMatrix, dKeep: int, dTraced: int, traced_last: bool = True
) -> ComplexMatrix:
    m = as_matrix(m)
    if dKeep < 1 or dTraced < 1 or m.shape[0] != dKeep * dTraced:
        raise DimensionMismatch(
            "matrix of dimension {} is not {} x {}".format(m.shape[0], dKeep, dTraced)
        )
    if traced_last:
        return np.einsum("ijkj->ik", m.reshape(dKeep, dTraced, dKeep, dTraced))
    return np.einsum("jijk->ik", m.reshape(dTraced, dKeep, dTraced, dKeep))


def permute_qubits(m: ComplexMatrix, order: Sequence[int]) -> ComplexMatrix:
    """Reorder the qubit factors so that factor `order[k]` becomes factor `k`."""
    m = as_matrix(m)
    n = len(order)
    if sorted(order) != list(range(n)):
        raise OutOfRange("{} is not a permutation of range({})".format(order, n))
    if m.shape[0] != 2 ** n:
        raise DimensionMismatch(
            "matrix of dimension {} does not hold {} qubits".format(m.shape[0], n)
        )
    axes = list(order) + [n + k for k in order]
    return m.reshape((2,) * (2 * n)).transpose(axes).reshape(m.shape)


def matmul(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    a, b = as_matrix(a), as_matrix(b)
    _require_same_shape(a, b)
    return a @ b


def adjoint(a: ComplexMatrix) -> ComplexMatrix:
    return as_matrix(a).conj().T


def add(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    a, b = as_matrix(a), as_matrix(b)
    _require_same_shape(a, b)
    return a + b


def scale(a: ComplexMatrix, factor: complex) -> ComplexMatrix:
    return as_matrix(a) * factor


def trace(a: ComplexMatrix) -> complex:
    return complex(np.trace(as_matrix(a)))
