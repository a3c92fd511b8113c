"""Blind source separation by joint diagonalization of cumulant matrices.

This is the JADE pipeline specialized to the distributed-subarray problem:
the K subarray snapshots act as K samples of an M-dimensional mixture
whose mixing matrix is the steering matrix and whose "sources" are the
per-subarray phase progressions of each impinging signal.  Separation
needs no calibration between subarrays, which is exactly what makes the
partly calibrated problem tractable from one temporal snapshot.

Stages, each exposed on its own:

1. whitening from the top of the sample covariance spectrum, with the
   noise level taken as the mean of the trailing eigenvalues,
2. fourth-order sample cumulants of the whitened rows packed into an
   L^2 x L^2 matrix,
3. joint approximate diagonalization of the dominant devectorized
   eigenmatrices by Givens rotations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, RankDeficiencyError
from .hermitian import hermitian_eig

__all__ = [
    "WhiteningResult",
    "CumulantMatrixSet",
    "UnitaryDiagonalizer",
    "SeparationResult",
    "estimate_whitener",
    "sample_cumulant",
    "cumulant_matrix_set",
    "joint_diagonalize",
    "jade_separate",
    "jade_cost",
]


def _frozen(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class WhiteningResult:
    """Whitening matrix W, noise estimate, and whitened rows Z = W Y."""

    whitener: np.ndarray
    noise_estimate: float
    whitened: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "whitener", _frozen(np.asarray(self.whitener, complex)))
        object.__setattr__(self, "whitened", _frozen(np.asarray(self.whitened, complex)))


@dataclass(frozen=True)
class CumulantMatrixSet:
    """The L eigen-scaled cumulant eigenmatrices to diagonalize jointly.

    ``eigenvalues`` holds the L dominant singular values used as scales;
    ``spectrum`` keeps the full signed eigenvalue list of the packed
    cumulant matrix (descending by magnitude) for inspection of what the
    truncation discarded, and ``packed`` the L^2 x L^2 matrix itself.
    """

    matrices: tuple
    eigenvalues: tuple
    spectrum: tuple
    packed: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self,
            "matrices",
            tuple(_frozen(np.asarray(m, complex)) for m in self.matrices),
        )
        object.__setattr__(self, "eigenvalues", tuple(float(v) for v in self.eigenvalues))
        object.__setattr__(self, "spectrum", tuple(float(v) for v in self.spectrum))
        object.__setattr__(self, "packed", _frozen(np.asarray(self.packed, complex)))


@dataclass(frozen=True)
class UnitaryDiagonalizer:
    """Accumulated Givens rotation V and the residual off-diagonal energy."""

    rotation: np.ndarray
    off_diagonal_energy: float
    sweeps: int

    def __post_init__(self):
        object.__setattr__(self, "rotation", _frozen(np.asarray(self.rotation, complex)))


@dataclass(frozen=True)
class SeparationResult:
    """Full output of the separation pipeline, recovered rows last."""

    whitener: WhiteningResult
    cumulants: CumulantMatrixSet
    diagonalizer: UnitaryDiagonalizer
    recovered: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "recovered", _frozen(np.asarray(self.recovered, complex)))


def estimate_whitener(measurements, n_sources):
    """Estimate the whitening matrix from the sample covariance.

    The noise level is the mean of the N - L smallest covariance
    eigenvalues; the whitener scales the top-L eigenvectors by the
    inverse square root of the debiased eigenvalues.

    Parameters
    ----------
    measurements : array_like
        N x T complex matrix (one column per sample).
    n_sources : int
        Number of signal dimensions L with 1 <= L < N and T >= L.

    Raises
    ------
    RankDeficiencyError
        If a debiased signal eigenvalue is not positive; the offending
        1-based index is recorded on the exception.
    """
    y = np.asarray(measurements, dtype=complex)
    if y.ndim != 2:
        raise InvalidParameterError("measurements must be a 2-D matrix")
    n_rows, n_samples = y.shape
    n_src = int(n_sources)
    if not (0 < n_src < n_rows):
        raise InvalidParameterError("need 1 <= n_sources < number of rows")
    if n_samples < n_src:
        raise InvalidParameterError("need at least n_sources samples")
    cov = y @ y.conj().T / n_samples
    values, vectors = hermitian_eig(cov)
    noise = max(float(np.mean(values[n_src:])), 0.0)
    gaps = values[:n_src] - noise
    for index, gap in enumerate(gaps):
        if gap <= 0:
            raise RankDeficiencyError(
                index + 1,
                f"signal eigenvalue {index + 1} ({values[index]:.3e}) does not "
                f"exceed the noise estimate {noise:.3e}",
            )
    whitener = (gaps**-0.5)[:, None] * vectors[:, :n_src].conj().T
    return WhiteningResult(
        whitener=whitener,
        noise_estimate=noise,
        whitened=whitener @ y,
    )


def sample_cumulant(ea, eb, ec, ed):
    """Fourth-order sample cumulant of four equal-length vectors.

    Computes (1/T)(ea.eb)'(ec.ed) minus the three Gaussian pairing terms
    (1/T^2)(ea'eb ec'ed + ea'ec eb'ed + ea'ed eb'ec), where '.' is the
    elementwise product and products are plain (unconjugated) dots.
    Conjugation is the caller's job, matching the convention that rows of
    the conjugated matrix are passed directly.
    """
    vecs = [np.asarray(v, dtype=complex).ravel() for v in (ea, eb, ec, ed)]
    n_samples = vecs[0].size
    if n_samples < 1 or any(v.size != n_samples for v in vecs):
        raise InvalidParameterError("cumulant arguments must share one nonzero length")
    a, b, c, d = vecs
    direct = (a * b) @ (c * d) / n_samples
    pairings = (a @ b) * (c @ d) + (a @ c) * (b @ d) + (a @ d) * (b @ c)
    return complex(direct - pairings / n_samples**2)


def cumulant_matrix_set(whitened):
    """Pack all fourth-order cumulants of the whitened rows and truncate.

    Entry (p, q) of the L^2 x L^2 cumulant matrix is the cumulant of rows
    (a, b, c, d) with p = a + (b-1) L and q = d + (c-1) L (1-based).  The
    matrix is Hermitian; its L dominant eigenvectors are devectorized
    column-major into L x L matrices and scaled by the corresponding
    singular values.
    """
    z = np.asarray(whitened, dtype=complex)
    if z.ndim != 2:
        raise InvalidParameterError("whitened rows must form a 2-D matrix")
    n_src, n_samples = z.shape
    if n_samples <= n_src:
        raise InvalidParameterError("need more samples than rows")
    zc = z.conj()
    # hadamard[a, b] = row_a * conj(row_b); inner products likewise cached
    hadamard = z[:, None, :] * zc[None, :, :]
    ip_plain = z @ z.T
    ip_mixed = z @ zc.T
    ip_conj = zc @ zc.T
    big = np.zeros((n_src * n_src, n_src * n_src), dtype=complex)
    for a in range(n_src):
        for b in range(n_src):
            p = a + b * n_src
            for c in range(n_src):
                for d in range(n_src):
                    q = d + c * n_src
                    direct = hadamard[a, b] @ hadamard[c, d] / n_samples
                    pairings = (
                        ip_mixed[a, b] * ip_mixed[c, d]
                        + ip_plain[a, c] * ip_conj[b, d]
                        + ip_mixed[a, d] * ip_mixed[c, b]
                    )
                    big[p, q] = direct - pairings / n_samples**2
    values, vectors = hermitian_eig(big)
    matrices = []
    scales = []
    for l in range(n_src):
        scale = abs(values[l])
        matrices.append(scale * vectors[:, l].reshape(n_src, n_src, order="F"))
        scales.append(scale)
    return CumulantMatrixSet(
        matrices=tuple(matrices),
        eigenvalues=tuple(scales),
        spectrum=tuple(values),
        packed=big,
    )


def _off_diagonal_energy(stack):
    energy = 0.0
    for matrix in stack:
        energy += float(np.sum(np.abs(matrix) ** 2) - np.sum(np.abs(np.diag(matrix)) ** 2))
    return energy


def joint_diagonalize(matrix_set, max_sweeps=100, angle_threshold=1e-8):
    """Jointly diagonalize a set of matrices by cyclic Givens rotations.

    Every (m, n) plane is rotated by the closed-form minimizer of the
    joint off-diagonal energy: the rotation angles come from the dominant
    eigenvector of the real part of O^H O, where row l of O collects the
    (m, n)-plane entries of matrix l.  Sweeps stop when every rotation
    angle in a sweep falls below ``angle_threshold`` or after
    ``max_sweeps``.

    Accepts a CumulantMatrixSet or any sequence of square matrices.
    """
    matrices = getattr(matrix_set, "matrices", matrix_set)
    stack = np.array([np.asarray(m, dtype=complex) for m in matrices])
    if stack.ndim != 3 or stack.shape[0] == 0 or stack.shape[1] != stack.shape[2]:
        raise InvalidParameterError("need a nonempty set of square matrices of one size")
    size = stack.shape[1]
    rotation = np.eye(size, dtype=complex)
    sweeps_done = 0
    for _ in range(int(max_sweeps)):
        rotated = False
        for m in range(size - 1):
            for n in range(m + 1, size):
                rows = np.stack(
                    [
                        stack[:, m, m] - stack[:, n, n],
                        stack[:, m, n] + stack[:, n, m],
                        1j * (stack[:, n, m] - stack[:, m, n]),
                    ],
                    axis=1,
                )
                target = np.real(rows.conj().T @ rows)
                _, eigvecs = hermitian_eig(target)
                direction = np.real(eigvecs[:, 0])
                if direction[0] < 0:
                    direction = -direction
                alpha = np.sqrt((1.0 + direction[0]) / 2.0)
                beta = (direction[1] - 1j * direction[2]) / (2.0 * alpha)
                if abs(beta) <= angle_threshold:
                    continue
                rotated = True
                givens = np.eye(size, dtype=complex)
                givens[m, m] = alpha
                givens[n, n] = alpha
                givens[n, m] = beta
                givens[m, n] = -np.conj(beta)
                stack = givens.conj().T @ stack @ givens
                rotation = rotation @ givens
        sweeps_done += 1
        if not rotated:
            break
    return UnitaryDiagonalizer(
        rotation=rotation,
        off_diagonal_energy=_off_diagonal_energy(stack),
        sweeps=sweeps_done,
    )


def jade_separate(measurements, n_sources, max_sweeps=100, angle_threshold=1e-8):
    """Run the full separation pipeline and return all intermediates.

    The recovered rows are V^H W Y; each row estimates one source row up
    to the usual permutation and per-row unit-modulus phase ambiguity.
    """
    whitening = estimate_whitener(measurements, n_sources)
    cumulants = cumulant_matrix_set(whitening.whitened)
    diagonalizer = joint_diagonalize(
        cumulants, max_sweeps=max_sweeps, angle_threshold=angle_threshold
    )
    recovered = diagonalizer.rotation.conj().T @ whitening.whitened
    return SeparationResult(
        whitener=whitening,
        cumulants=cumulants,
        diagonalizer=diagonalizer,
        recovered=recovered,
    )


def jade_cost(source_rows, include_diagonal_triples=False):
    """Sum of squared fourth-order cross-cumulant moduli over row triples.

    The sum runs over triples (r, p, q) of Cum(row_r, conj row_r, row_p,
    conj row_q).  By default the L fully diagonal triples r = p = q are
    excluded: they measure the rows' own kurtosis, not their mutual
    contamination, and stay bounded away from zero for constant-modulus
    rows.  Set ``include_diagonal_triples`` to sum every triple.
    """
    s = np.asarray(getattr(source_rows, "data", source_rows), dtype=complex)
    if s.ndim != 2 or s.size == 0:
        raise InvalidParameterError("source rows must form a nonempty 2-D matrix")
    n_rows = s.shape[0]
    sc = s.conj()
    total = 0.0
    for r in range(n_rows):
        for p in range(n_rows):
            for q in range(n_rows):
                if not include_diagonal_triples and r == p == q:
                    continue
                total += abs(sample_cumulant(s[r], sc[r], s[p], sc[q])) ** 2
    return total
