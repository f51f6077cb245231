"""Circle diffeomorphisms acting on H^{1/2} and their truncated matrices.

A diffeomorphism ``psi`` acts on mean-zero functions by
``(psi.u)(theta) = u(phi(theta)) - mean``, with ``phi = psi^{-1}``.  Its
matrix in the e~ basis is built from the Fourier coefficients::

    I_{n,m} = (1/2pi) int exp(i m phi(theta) - i n theta) dtheta

which are computed by FFT on a uniform grid.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fourier_core import CoeffVec, ContractError, ModeWindow, TILDE, eval_on_grid, to_hat


class NumericalError(RuntimeError):
    pass


class AccuracyWarning(UserWarning):
    """The quadrature grid does not resolve the integrand well."""


# --- diffeomorphism families -------------------------------------------------

@dataclass(frozen=True)
class Rotation:
    alpha: float

    def __call__(self, theta):
        return np.asarray(theta, dtype=float) + self.alpha

    def deriv(self, theta):
        return np.ones_like(np.asarray(theta, dtype=float))


@dataclass(frozen=True)
class _Trig:
    k: int
    eps: float

    def __post_init__(self):
        if self.k < 1 or int(self.k) != self.k:
            raise ContractError(f"mode k must be a positive integer, got {self.k}")
        if abs(self.eps * self.k) >= 1:
            raise ContractError(f"|eps*k| must be < 1 (got eps={self.eps}, k={self.k})")


@dataclass(frozen=True)
class Sine(_Trig):
    """``psi(theta) = theta + eps sin(k theta)``."""

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        return theta + self.eps * np.sin(self.k * theta)

    def deriv(self, theta):
        return 1.0 + self.eps * self.k * np.cos(self.k * np.asarray(theta, dtype=float))


@dataclass(frozen=True)
class Cosine(_Trig):
    """``psi(theta) = theta + eps cos(k theta)``."""

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        return theta + self.eps * np.cos(self.k * theta)

    def deriv(self, theta):
        return 1.0 - self.eps * self.k * np.sin(self.k * np.asarray(theta, dtype=float))


@dataclass(frozen=True)
class Compose:
    """``parts[0] o parts[1] o ...``; the last part is applied first."""

    parts: tuple

    def __init__(self, parts: Sequence):
        if not parts:
            raise ContractError("compose needs at least one part")
        object.__setattr__(self, "parts", tuple(parts))

    def __call__(self, theta):
        out = np.asarray(theta, dtype=float)
        for p in reversed(self.parts):
            out = p(out)
        return out

    def deriv(self, theta):
        out = np.asarray(theta, dtype=float)
        d = np.ones_like(out)
        for p in reversed(self.parts):
            d = d * p.deriv(out)
            out = p(out)
        return d


IDENTITY = Rotation(0.0)


def _invert_trig(psi, theta, max_iter=100, tol=2e-15):
    t = theta.copy()
    done = np.zeros(t.shape, bool)
    for _ in range(max_iter):
        r = psi(t) - theta
        done = np.abs(r) <= tol * np.maximum(1.0, np.abs(theta))
        if done.all():
            return t
        t = np.where(done, t, t - r / psi.deriv(t))
    # bisection on the points Newton did not settle; |psi(t) - t| <= |eps|
    bad = ~done
    lo = theta[bad] - abs(psi.eps) - 1e-12
    hi = theta[bad] + abs(psi.eps) + 1e-12
    target = theta[bad]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = psi(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    t[bad] = 0.5 * (lo + hi)
    return t


def invert_diffeo(psi, theta):
    """Return ``phi(theta) = psi^{-1}(theta)``.

    Newton iteration seeded at ``theta`` with a bisection fallback.  Raises
    :class:`NumericalError` if the result misses ``|psi(phi) - theta| <= 1e-13``.
    """
    theta = np.asarray(theta, dtype=float)
    scalar = theta.ndim == 0
    th = np.atleast_1d(theta).astype(float)
    if isinstance(psi, Rotation):
        out = th - psi.alpha
    elif isinstance(psi, _Trig):
        out = _invert_trig(psi, th)
    elif isinstance(psi, Compose):
        out = th
        for p in psi.parts:
            out = np.atleast_1d(invert_diffeo(p, out))
    else:
        raise ContractError(f"unknown diffeomorphism family {type(psi).__name__}")
    err = np.max(np.abs(psi(out) - th)) if out.size else 0.0
    if err > 1e-13 * max(1.0, float(np.max(np.abs(th)) / (2 * np.pi))):
        raise NumericalError(f"inverse map residual {err:.3e} exceeds 1e-13")
    return out[0] if scalar else out


# --- quadrature --------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureGrid:
    M: int

    def __post_init__(self):
        if self.M < 2 or self.M & (self.M - 1):
            raise ContractError(f"grid size must be a power of two, got {self.M}")

    @property
    def theta(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.M) / self.M

    @classmethod
    def default(cls, window: ModeWindow) -> "QuadratureGrid":
        M = 1
        while M < 8 * window.N:
            M *= 2
        return cls(M)


def _check_grid(window, grid):
    grid = QuadratureGrid.default(window) if grid is None else grid
    if grid.M < 8 * window.N:
        raise ContractError(f"grid M={grid.M} is below 8N={8 * window.N}")
    return grid


def _aliasing_tail(spec: np.ndarray) -> float:
    # spec: full DFT spectrum along axis 0; fraction of energy above M/4
    M = spec.shape[0]
    freq = np.abs(np.fft.fftfreq(M, 1.0 / M))
    e = np.abs(spec) ** 2
    total = e.sum(axis=0)
    tail = e[freq > M / 4].sum(axis=0)
    return float(np.max(tail / np.where(total > 0, total, 1.0)))


def action_matrix(psi, window: ModeWindow, grid: QuadratureGrid | None = None,
                  columns=None) -> np.ndarray:
    """``I_{n,m}`` for all window n (rows) and the requested m (columns).

    ``columns`` is a sequence of indices; default is the whole window.
    """
    grid = _check_grid(window, grid)
    ms = window.indices if columns is None else np.asarray(columns)
    phi = invert_diffeo(psi, grid.theta)
    spec = np.fft.fft(np.exp(1j * np.multiply.outer(phi, ms)), axis=0) / grid.M
    tail = _aliasing_tail(spec)
    if tail > 1e-6:
        warnings.warn(f"quadrature tail energy fraction {tail:.2e} exceeds 1e-6; "
                      f"increase the grid size", AccuracyWarning, stacklevel=2)
    # bin 0 (the mean) is never read: window indices are nonzero
    return spec[window.indices % grid.M, :]


def action_coeffs(psi, m: int, grid: QuadratureGrid | None, window: ModeWindow) -> CoeffVec:
    """Hat coefficients ``{I_{n,m}}_n`` of ``psi . e^_m``."""
    if not window.contains(m):
        raise ContractError(f"index {m} is not in the window N={window.N}")
    return CoeffVec(window, action_matrix(psi, window, grid, [m])[:, 0])


def _gamma(window):
    idx = window.indices
    r = np.sqrt(np.abs(idx)).astype(complex)
    return np.where(idx > 0, 1 / r, 1 / (1j * r))


def _tilde(window):
    idx = window.indices
    r = np.sqrt(np.abs(idx)).astype(complex)
    return np.where(idx > 0, r, 1j * r)


def embed(psi, window: ModeWindow, grid: QuadratureGrid | None = None) -> np.ndarray:
    """Truncated matrix ``Phi_{n,m} = (psi . e~_m, e~_n)`` in the e~ basis."""
    I = action_matrix(psi, window, grid)
    return _tilde(window)[:, None] * I * _gamma(window)[None, :]


def homomorphism_defect(psi1, psi2, window: ModeWindow, grid=None, radius=None) -> float:
    """``max |Phi(psi1 o psi2) - Phi(psi1) Phi(psi2)|`` on the central window."""
    P12 = embed(Compose([psi1, psi2]), window, grid)
    P1 = embed(psi1, window, grid)
    P2 = embed(psi2, window, grid)
    c = window.central(radius)
    return float(np.max(np.abs((P12 - P1 @ P2)[np.ix_(c, c)])))


# --- coefficient bounds ------------------------------------------------------

def weighted_column_sums(psi, window: ModeWindow, ms, grid=None) -> np.ndarray:
    """``sum_n |n| |I_{n,m}|^2 / |m|`` for each m in ``ms``."""
    ms = np.asarray(ms)
    I = action_matrix(psi, window, grid, ms)
    n = np.abs(window.indices)[:, None]
    return (n * np.abs(I) ** 2).sum(axis=0) / np.abs(ms)


def offcorner_sums(psi, window: ModeWindow, radius: int, grid=None) -> tuple[float, float]:
    """Off-corner sums over ``n > 0 > m`` with ``|n|, |m| <= radius``.

    Returns ``(sum |n| |I_{n,m}|^2, sum |Phi_{n,m}|^2)``; the two differ by
    the factor ``1/|m|`` that the exact e~ rescaling introduces.
    """
    idx = window.indices
    rows = np.flatnonzero((idx > 0) & (idx <= radius))
    cols = np.flatnonzero((idx < 0) & (idx >= -radius))
    I = action_matrix(psi, window, grid, idx[cols])[rows]
    n = idx[rows][:, None].astype(float)
    m = np.abs(idx[cols])[None, :].astype(float)
    w = np.abs(I) ** 2
    return float((n * w).sum()), float((n / m * w).sum())


# --- generators and the non-surjectivity witness ----------------------------

def _sign_table(m, n):
    return np.where((m > 0) & (n > 0), -1j, np.where((m < 0) & (n < 0), 1j, 1.0 + 0j))


def vf_generator(kind: str, l: int, window: ModeWindow) -> np.ndarray:
    """Matrix of the vector field ``cos(l theta) d/dtheta`` or ``sin(l theta) d/dtheta``.

    ``(X_l)_{mn} = s(m,n) sqrt|mn|/2 (delta_{m-n,l} + delta_{n-m,l})``
    ``(Y_l)_{mn} = -i s(m,n) sqrt|mn|/2 (delta_{m-n,l} - delta_{n-m,l})``
    """
    if kind not in ("cos", "sin"):
        raise ContractError(f"kind must be 'cos' or 'sin', got {kind!r}")
    if l < 0 or (kind == "sin" and l < 1):
        raise ContractError(f"invalid mode l={l} for kind {kind}")
    m = window.indices[:, None]
    n = window.indices[None, :]
    up = (m - n == l).astype(float)
    down = (n - m == l).astype(float)
    amp = 0.5 * np.sqrt(np.abs(m * n)) * _sign_table(m, n)
    if kind == "cos":
        return amp * (up + down)
    return -1j * amp * (up - down)


def witness_not_surjective(window: ModeWindow) -> np.ndarray:
    """Element of Sp(infinity) that no diffeomorphism produces.

    Identity except ``A_{1,1} = A_{-1,-1} = sqrt 2``, ``A_{1,-1} = i``,
    ``A_{-1,1} = -i``.
    """
    A = np.eye(window.size, dtype=complex)
    p, q = window.slot(1), window.slot(-1)
    A[p, p] = A[q, q] = np.sqrt(2)
    A[p, q] = 1j
    A[q, p] = -1j
    return A


def image_curve(A, n: int, samples: int) -> np.ndarray:
    """Points ``(A e~_n)(theta)`` on a uniform theta grid, as complex numbers."""
    A = np.asarray(A)
    window = ModeWindow.for_size(A.shape[0])
    col = CoeffVec(window, A[:, window.slot(n)], TILDE)
    theta = 2 * np.pi * np.arange(samples) / samples
    return eval_on_grid(to_hat(col), theta)
