"""Cyclic Jacobi eigendecomposition for Hermitian matrices.

The separation stage only ever diagonalizes small Hermitian matrices (the
sample covariance and the L^2 x L^2 cumulant matrix with L of a few), so a
plain cyclic Jacobi iteration is accurate, dependency-free, and reuses the
same Givens machinery as the joint diagonalization step.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidParameterError

__all__ = ["hermitian_eig"]


def _plane_rotation(app, aqq, apq):
    """Unitary 2x2 rotation U with U^H [[app, apq], [apq*, aqq]] U diagonal.

    Returns the four entries (upp, upq, uqp, uqq).  app and aqq are real.
    """
    scale = abs(apq)
    phase = apq / scale
    # With the phase factored out the block is real symmetric; use the
    # standard stable half-angle formulas on it.
    tau = (aqq - app) / (2.0 * scale)
    if tau >= 0:
        t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
    else:
        t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    return c, s * phase, -s * np.conj(phase), c


def hermitian_eig(matrix, max_sweeps=100):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    matrix : array_like
        Square matrix; its Hermitian part (A + A^H) / 2 is decomposed.
    max_sweeps : int
        Safety cap on full cyclic sweeps; convergence is quadratic and
        typically needs fewer than ten.

    Returns
    -------
    (eigenvalues, eigenvectors)
        Real eigenvalues sorted descending by magnitude (ties keep their
        original diagonal order) and the matching orthonormal columns.
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidParameterError("matrix must be square")
    n = a.shape[0]
    a = (a + a.conj().T) / 2.0
    vectors = np.eye(n, dtype=complex)
    if n == 1:
        return np.array([a[0, 0].real]), vectors

    threshold = 1e-14 * np.linalg.norm(a)
    if threshold == 0.0:
        return np.zeros(n), vectors

    for _ in range(int(max_sweeps)):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) <= threshold:
                    continue
                rotated = True
                upp, upq, uqp, uqq = _plane_rotation(
                    a[p, p].real, a[q, q].real, a[p, q]
                )
                u = np.array([[upp, upq], [uqp, uqq]])
                a[:, [p, q]] = a[:, [p, q]] @ u
                a[[p, q], :] = u.conj().T @ a[[p, q], :]
                # keep the working matrix exactly Hermitian
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                a[q, p] = np.conj(a[p, q])
                vectors[:, [p, q]] = vectors[:, [p, q]] @ u
        if not rotated:
            break

    values = a.diagonal().real.copy()
    order = np.argsort(-np.abs(values), kind="stable")
    return values[order], vectors[:, order]
