"""Truncated operators in the e~ basis and symplectic-group predicates.

A truncated operator is a dense complex ``2N x 2N`` array ``A`` whose entry
at slots ``(slot(m), slot(n))`` is ``A_{m,n} = (A e~_n, e~_m)``.  Since the
slot order is symmetric, the reflected entry ``A_{-m,-n}`` is simply
``A[::-1, ::-1]``.
"""
from __future__ import annotations

import csv

import numpy as np

from .fourier_core import ContractError, ModeWindow

QUADRANTS = ("a", "b", "c", "d")


def window_of(A: np.ndarray) -> ModeWindow:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {A.shape}")
    return ModeWindow.for_size(A.shape[0])


def _signs(A) -> np.ndarray:
    return window_of(A).signs


def identity(window: ModeWindow) -> np.ndarray:
    return np.eye(window.size, dtype=complex)


def hilbert_matrix(window: ModeWindow) -> np.ndarray:
    """J as a matrix: ``J_{m,n} = i sgn(m) delta_{mn}``."""
    return np.diag(1j * window.signs)


def conj_op(A):
    """``(conj A)_{m,n} = conj(A_{-m,-n})``."""
    return np.conj(np.asarray(A)[::-1, ::-1])


def dagger(A):
    """``(A^dagger)_{m,n} = conj(A_{n,m})``."""
    return np.conj(np.asarray(A)).T


def transpose(A):
    """``(A^T)_{m,n} = A_{-n,-m}``."""
    return np.asarray(A)[::-1, ::-1].T


def sharp(A):
    """Symplectic adjoint, ``(A#)_{m,n} = sgn(mn) A_{-n,-m}``."""
    s = _signs(A)
    return np.outer(s, s) * transpose(A)


def block(A, quadrant: str) -> np.ndarray:
    """One of the four ``N x N`` blocks.

    ``a``: rows m>0, cols n>0; ``b``: m>0, n<0; ``c``: m<0, n>0;
    ``d``: m<0, n<0.  Row/column order inside a block follows the window.
    """
    A = np.asarray(A)
    N = window_of(A).N
    neg, pos = slice(0, N), slice(N, 2 * N)
    sl = {"a": (pos, pos), "b": (pos, neg), "c": (neg, pos), "d": (neg, neg)}
    if quadrant not in sl:
        raise ContractError(f"quadrant must be one of {QUADRANTS}, got {quadrant!r}")
    r, c = sl[quadrant]
    return A[r, c]


def norm2(A) -> float:
    """Hilbert-Schmidt (Frobenius) norm of the off-diagonal block b."""
    return float(np.linalg.norm(block(A, "b")))


def op_norm(A, iters: int = 100, rtol: float = 1e-6, seed: int = 0) -> float:
    """Operator 2-norm estimate by power iteration on ``A^dagger A``."""
    A = np.asarray(A, dtype=complex)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[1]) + 1j * rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = A.conj().T @ (A @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(nw - est) <= rtol * nw:
            est = nw
            break
        est = nw
    return float(np.sqrt(est))


# --- residuals ---------------------------------------------------------------

def real_residual(A) -> float:
    """``max |A_{m,n} - conj(A_{-m,-n})|``."""
    A = np.asarray(A)
    return float(np.max(np.abs(A - conj_op(A))))


def _restrict(R, slots):
    return R if slots is None else R[np.ix_(slots, slots)]


def omega_residual(A, slots=None) -> float:
    """Deviation of ``sum_k sgn(mk) A_{k,m} conj(A_{k,n})`` from ``delta_{mn}``.

    This is the column condition for A to preserve the symplectic form.
    ``slots`` optionally restricts the (m, n) pairs that are checked; the
    sum over k always runs over the full window.
    """
    A = np.asarray(A)
    s = _signs(A)
    G = s[:, None] * (A.T @ (s[:, None] * np.conj(A)))
    return float(np.max(np.abs(_restrict(G - np.eye(len(s)), slots))))


def invertible_residual(A, slots=None) -> float:
    """Deviation of ``sum_k sgn(mk) A_{m,k} conj(A_{n,k})`` from ``delta_{mn}``."""
    A = np.asarray(A)
    s = _signs(A)
    G = s[:, None] * ((A * s[None, :]) @ np.conj(A).T)
    return float(np.max(np.abs(_restrict(G - np.eye(len(s)), slots))))


def sharp_residuals(A, slots=None) -> tuple[float, float]:
    """``(max|A#A - I|, max|AA# - I|)``."""
    A = np.asarray(A)
    S = sharp(A)
    eye = np.eye(A.shape[0])
    return (float(np.max(np.abs(_restrict(S @ A - eye, slots)))),
            float(np.max(np.abs(_restrict(A @ S - eye, slots)))))


# --- predicates --------------------------------------------------------------

def is_real(A, tol: float = 1e-10) -> bool:
    return real_residual(A) <= tol


def preserves_omega(A, tol: float = 1e-10) -> bool:
    return omega_residual(A) <= tol


def invertible_symplectic(A, tol: float = 1e-10) -> bool:
    return invertible_residual(A) <= tol


def in_sp_group(A, tol: float = 1e-10) -> bool:
    return is_real(A, tol) and max(sharp_residuals(A)) <= tol


# --- CSV ---------------------------------------------------------------------

def write_matrix_csv(A, path) -> None:
    """Dump with header ``m,n,re,im``, rows in serialization order."""
    A = np.asarray(A, dtype=complex)
    idx = window_of(A).indices
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "n", "re", "im"])
        for i, m in enumerate(idx):
            for j, n in enumerate(idx):
                z = A[i, j]
                w.writerow([int(m), int(n), format(z.real, ".17g"), format(z.imag, ".17g")])


def read_matrix_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    side = int(round(np.sqrt(len(rows))))
    if side * side != len(rows):
        raise ContractError(f"{len(rows)} rows do not form a square matrix")
    window = ModeWindow.for_size(side)
    A = np.empty((side, side), dtype=complex)
    for r in rows:
        m, n = int(r["m"]), int(r["n"])
        A[window.slot(m), window.slot(n)] = complex(float(r["re"]), float(r["im"]))
    return A
