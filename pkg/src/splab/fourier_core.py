"""Index windows, Fourier coefficient vectors and the basic forms on them.

Functions on the circle with zero mean are stored by their Fourier
coefficients over a symmetric window of nonzero indices
``-N, ..., -1, 1, ..., N``.  Index 0 has no slot, so the mean-zero
constraint holds by construction.

Two coefficient conventions are used.  In the *hat* convention the vector
holds ``u_hat(n)``, the coefficient of ``exp(i n theta)``.  In the *tilde*
convention it holds the coordinates in the basis that is orthonormal for
the H^{1/2} inner product::

    e~_n = exp(i n theta) / sqrt(n)          n > 0
    e~_n = exp(i n theta) / (i sqrt(|n|))    n < 0
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

HAT = "hat"
TILDE = "tilde"


class ContractError(ValueError):
    """An input violates the documented precondition of an operation."""


class DimensionError(ValueError):
    """Two objects live on different index windows."""


@dataclass(frozen=True)
class ModeWindow:
    """Symmetric window of nonzero Fourier indices.

    Negative indices come first, ascending, then the positive ones, so that
    ``slot(-N) == 0`` and ``slot(N) == 2N - 1``.  Negating an index is the
    same as reversing the slot order.
    """

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ContractError(f"window size must be a positive integer, got {self.N!r}")

    @cached_property
    def indices(self) -> np.ndarray:
        n = np.arange(1, self.N + 1)
        return np.concatenate([-n[::-1], n])

    @property
    def size(self) -> int:
        return 2 * self.N

    @cached_property
    def signs(self) -> np.ndarray:
        return np.sign(self.indices).astype(float)

    def slot(self, m: int) -> int:
        if m == 0 or abs(m) > self.N:
            raise ContractError(f"index {m} is not in the window N={self.N}")
        return m + self.N if m < 0 else m + self.N - 1

    def contains(self, m: int) -> bool:
        return m != 0 and abs(m) <= self.N

    def central(self, radius: int | None = None) -> np.ndarray:
        """Slots of the indices with ``|m| <= radius`` (default ``N // 2``)."""
        r = self.N // 2 if radius is None else radius
        return np.flatnonzero(np.abs(self.indices) <= r)

    @classmethod
    def for_size(cls, size: int) -> "ModeWindow":
        if size % 2 or size < 2:
            raise DimensionError(f"matrix side {size} is not an even window size")
        return cls(size // 2)


def _tilde_scale(window: ModeWindow) -> np.ndarray:
    # u~(n) = scale(n) * u^(n)
    idx = window.indices
    root = np.sqrt(np.abs(idx)).astype(complex)
    return np.where(idx > 0, root, 1j * root)


@dataclass(frozen=True)
class CoeffVec:
    """Coefficients over a window, tagged with their basis convention."""

    window: ModeWindow
    values: np.ndarray = field(repr=False)
    basis: str = HAT

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (self.window.size,):
            raise DimensionError(
                f"expected {self.window.size} coefficients, got shape {vals.shape}")
        if self.basis not in (HAT, TILDE):
            raise ContractError(f"unknown basis tag {self.basis!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __getitem__(self, m: int) -> complex:
        return self.values[self.window.slot(m)]

    @classmethod
    def zeros(cls, window: ModeWindow, basis: str = HAT) -> "CoeffVec":
        return cls(window, np.zeros(window.size, complex), basis)

    @classmethod
    def unit(cls, window: ModeWindow, n: int, basis: str = HAT) -> "CoeffVec":
        """Single mode: ``e^_n`` for ``basis='hat'``, ``e~_n`` for ``'tilde'``."""
        v = np.zeros(window.size, complex)
        v[window.slot(n)] = 1.0
        return cls(window, v, basis)

    def as_hat(self) -> "CoeffVec":
        return self if self.basis == HAT else to_hat(self)


def to_tilde(u: CoeffVec) -> CoeffVec:
    """Convert hat coefficients to coordinates in the e~ basis."""
    if u.basis != HAT:
        raise ContractError("to_tilde expects a hat-basis vector")
    return CoeffVec(u.window, u.values * _tilde_scale(u.window), TILDE)


def to_hat(u: CoeffVec) -> CoeffVec:
    """Inverse of :func:`to_tilde`."""
    if u.basis != TILDE:
        raise ContractError("to_hat expects a tilde-basis vector")
    return CoeffVec(u.window, u.values / _tilde_scale(u.window), HAT)


def hilbert(u: CoeffVec) -> CoeffVec:
    """Hilbert transform J: multiply mode n by ``i sgn(n)``.

    J is diagonal in both conventions, so the basis tag is preserved.
    """
    return CoeffVec(u.window, 1j * u.window.signs * u.values, u.basis)


def _same_window(u: CoeffVec, v: CoeffVec):
    if u.window != v.window:
        raise DimensionError(f"windows differ: N={u.window.N} vs N={v.window.N}")


def omega_form(u: CoeffVec, v: CoeffVec) -> complex:
    """Symplectic form ``(1/2pi) int u v' dtheta``, evaluated spectrally.

    Returns ``sum_n i n u^(-n) v^(n)``.
    """
    _same_window(u, v)
    uh, vh = u.as_hat().values, v.as_hat().values
    n = u.window.indices
    # reversing the slots maps index n to -n
    return complex(np.sum(1j * n * uh[::-1] * vh))


def h_half_norm_sq(u: CoeffVec) -> float:
    """Squared H^{1/2} norm, ``sum |n| |u^(n)|^2``."""
    if u.basis == TILDE:
        return float(np.sum(np.abs(u.values) ** 2))
    return float(np.sum(np.abs(u.window.indices) * np.abs(u.values) ** 2))


def smoothness_profile(u: CoeffVec, kmax: int) -> list[tuple[int, float]]:
    """Tail-weighted suprema ``sup_{|n| >= N/2} |n|^k |u^(n)|`` for k = 1..kmax.

    Rapid decay of these numbers is the finite-window stand-in for
    smoothness of ``u``.
    """
    if kmax < 1:
        raise ContractError("kmax must be at least 1")
    uh = u.as_hat()
    n = np.abs(uh.window.indices)
    tail = n >= uh.window.N / 2
    amp = np.abs(uh.values[tail])
    nt = n[tail].astype(float)
    out = []
    for k in range(1, kmax + 1):
        out.append((k, float(np.max(nt ** k * amp)) if amp.size else 0.0))
    return out


def eval_on_grid(u: CoeffVec, theta) -> np.ndarray:
    """Evaluate the function with these coefficients at the angles ``theta``."""
    uh = u.as_hat()
    theta = np.asarray(theta, dtype=float)
    return np.exp(1j * np.multiply.outer(theta, uh.window.indices)) @ uh.values


def write_coeff_csv(u: CoeffVec, path) -> None:
    """Dump ``u`` as CSV with header ``n,re,im`` (17 significant digits)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "re", "im"])
        for n, z in zip(u.window.indices, u.values):
            w.writerow([int(n), format(z.real, ".17g"), format(z.imag, ".17g")])


def read_coeff_csv(path, basis: str = HAT) -> CoeffVec:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    n = np.array([int(r["n"]) for r in rows])
    window = ModeWindow.for_size(len(rows))
    if not np.array_equal(n, window.indices):
        raise ContractError("rows are not in window serialization order")
    vals = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
    return CoeffVec(window, vals, basis)
