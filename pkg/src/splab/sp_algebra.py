"""The Lie algebra sp on a finite window, its lambda-metric and covariances.

An element ``A`` of sp satisfies ``A = conj(A)`` (entrywise
``A_{m,n} = conj(A_{-m,-n})``) and ``A + A# = 0``.  Elements are stored
sparsely in :class:`SpElem`; anything that accepts an SpElem also accepts a
dense window matrix.

The metric is parameterized by positive weights ``lambda_i = lambda_{-i}``:
the matrices ``xi_ab = 2 lambda_a lambda_b e_ab`` and ``i xi_ab`` are
declared orthonormal.  ``lambda = 1/sqrt(2)`` gives the canonical real
Hilbert-Schmidt inner product.
"""
from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .fourier_core import ContractError, DimensionError, ModeWindow
from .op_algebra import conj_op, sharp

KINDS = ("muRe", "muIm", "nuRe", "nuIm")
CANONICAL_LAMBDA = 1 / math.sqrt(2)


class CovSpecError(ValueError):
    """Malformed covariance specification."""


def _sgn(x):
    return 1 if x > 0 else -1


# --- sparse elements ---------------------------------------------------------

class SpElem:
    """Sparse window matrix, ``{(m, n): value}`` with nonzero indices."""

    __slots__ = ("window", "entries")

    def __init__(self, window: ModeWindow, entries=None):
        self.window = window
        self.entries = {}
        for (m, n), v in (entries or {}).items():
            if not (window.contains(m) and window.contains(n)):
                raise ContractError(f"entry ({m},{n}) outside window N={window.N}")
            if v != 0:
                self.entries[(m, n)] = complex(v)

    def __repr__(self):
        return f"SpElem(N={self.window.N}, nnz={len(self.entries)})"

    def get(self, m, n) -> complex:
        return self.entries.get((m, n), 0j)

    def to_dense(self) -> np.ndarray:
        w = self.window
        A = np.zeros((w.size, w.size), complex)
        for (m, n), v in self.entries.items():
            A[w.slot(m), w.slot(n)] = v
        return A

    @classmethod
    def from_dense(cls, A, tol: float = 0.0) -> "SpElem":
        A = np.asarray(A)
        w = ModeWindow.for_size(A.shape[0])
        idx = w.indices
        rows, cols = np.nonzero(np.abs(A) > tol)
        return cls(w, {(int(idx[i]), int(idx[j])): A[i, j] for i, j in zip(rows, cols)})

    def _check(self, other):
        if self.window != other.window:
            raise DimensionError("elements live on different windows")

    def __add__(self, other):
        self._check(other)
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0) + v
        return SpElem(self.window, out)

    def __sub__(self, other):
        return self + other * -1

    def __mul__(self, c):
        return SpElem(self.window, {k: c * v for k, v in self.entries.items()})

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check(other)
        rows = defaultdict(list)
        for (k, n), v in other.entries.items():
            rows[k].append((n, v))
        out = defaultdict(complex)
        for (m, k), u in self.entries.items():
            for n, v in rows.get(k, ()):
                out[(m, n)] += u * v
        return SpElem(self.window, out)

    def sharp(self) -> "SpElem":
        return SpElem(self.window, {(-n, -m): _sgn(m * n) * v
                                    for (m, n), v in self.entries.items()})

    def conj(self) -> "SpElem":
        return SpElem(self.window, {(-m, -n): np.conj(v) for (m, n), v in self.entries.items()})


def _dense(x) -> np.ndarray:
    return x.to_dense() if isinstance(x, SpElem) else np.asarray(x)


def sp_residual(x) -> float:
    """``max(|A - conj(A)|, |A + A#|)`` entrywise."""
    A = _dense(x)
    return float(max(np.max(np.abs(A - conj_op(A))), np.max(np.abs(A + sharp(A)))))


def sp_check(x, tol: float = 1e-12) -> bool:
    return sp_residual(x) <= tol


def bracket(x, y):
    """Commutator ``xy - yx``; sparse in, sparse out."""
    if isinstance(x, SpElem) and isinstance(y, SpElem):
        return x @ y - y @ x
    X, Y = _dense(x), _dense(y)
    return X @ Y - Y @ X


# --- lambda weights ----------------------------------------------------------

@dataclass(frozen=True)
class LambdaSeq:
    """Positive weights ``lambda_1 .. lambda_N``, extended by ``lambda_{-i} = lambda_i``."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals or min(vals) <= 0 or not all(map(math.isfinite, vals)):
            raise ContractError("lambda values must be finite and strictly positive")
        object.__setattr__(self, "values", vals)

    @property
    def N(self) -> int:
        return len(self.values)

    def __call__(self, i: int) -> float:
        if i == 0 or abs(i) > len(self.values):
            raise ContractError(f"lambda_{i} is not defined (N={len(self.values)})")
        return self.values[abs(i) - 1]

    def on_window(self, window: ModeWindow) -> np.ndarray:
        v = np.asarray(self.values[: window.N])
        if len(v) < window.N:
            raise ContractError(f"lambda has {len(self.values)} values, window needs {window.N}")
        return np.concatenate([v[::-1], v])

    @classmethod
    def uniform(cls, x: float, N: int) -> "LambdaSeq":
        return cls((x,) * N)

    @classmethod
    def canonical(cls, N: int) -> "LambdaSeq":
        return cls.uniform(CANONICAL_LAMBDA, N)

    @classmethod
    def power(cls, p: float, N: int) -> "LambdaSeq":
        return cls(tuple(i ** (-p / 2) for i in range(1, N + 1)))

    @classmethod
    def from_file(cls, path, N: int) -> "LambdaSeq":
        with open(path) as fh:
            vals = [float(s) for s in fh.read().split()]
        if len(vals) < N:
            raise ContractError(f"{path}: need {N} lambda values, found {len(vals)}")
        return cls(tuple(vals[:N]))

    @classmethod
    def parse(cls, text: str, N: int) -> "LambdaSeq":
        """Grammar ``uniform:<x> | power:<p> | file:<path>``."""
        kind, _, arg = text.partition(":")
        try:
            if kind == "uniform":
                return cls.uniform(float(arg), N)
            if kind == "power":
                return cls.power(float(arg), N)
            if kind == "file":
                return cls.from_file(arg, N)
        except ValueError as exc:
            raise ContractError(f"bad lambda spec {text!r}: {exc}") from exc
        raise ContractError(f"bad lambda spec {text!r}; expected uniform:x, power:p or file:path")


def inner_lambda(x, y, lam: LambdaSeq) -> float:
    """Real inner product making every ``xi_ab`` and ``i xi_ab`` orthonormal."""
    if isinstance(x, SpElem) and isinstance(y, SpElem):
        x._check(y)
        tot = 0.0
        small, big = (x, y) if len(x.entries) <= len(y.entries) else (y, x)
        for (m, n), u in small.entries.items():
            v = big.entries.get((m, n))
            if v is not None:
                tot += (u.real * v.real + u.imag * v.imag) / (4 * lam(m) ** 2 * lam(n) ** 2)
        return tot
    X, Y = _dense(x), _dense(y)
    if X.shape != Y.shape:
        raise DimensionError("shapes differ")
    L = lam.on_window(ModeWindow.for_size(X.shape[0])) ** 2
    W = 1.0 / (4 * np.outer(L, L))
    return float(np.sum(W * (X.real * Y.real + X.imag * Y.imag)))


def xi(a: int, b: int, lam: LambdaSeq, window: ModeWindow, imag: bool = False) -> SpElem:
    """``xi_ab = 2 lambda_a lambda_b e_ab`` (or ``i xi_ab``).  Not itself in sp."""
    return SpElem(window, {(a, b): 2 * lam(a) * lam(b) * (1j if imag else 1)})


# --- canonical basis ---------------------------------------------------------

class BasisLabel(NamedTuple):
    kind: str
    a: int
    b: int

    def validate(self, N: int | None = None) -> "BasisLabel":
        k, a, b = self
        ok = {"muRe": a > b > 0, "muIm": a >= b > 0,
              "nuRe": a >= -b > 0, "nuIm": a >= -b > 0}.get(k)
        if ok is None:
            raise ContractError(f"unknown basis kind {k!r}")
        if not ok:
            raise ContractError(f"label {self} violates the ordering constraint for {k}")
        if N is not None and max(abs(a), abs(b)) > N:
            raise ContractError(f"label {self} is outside the window N={N}")
        return self

    @property
    def degenerate(self) -> bool:
        return abs(self.a) == abs(self.b)

    def __str__(self):
        return f"{self.kind}({self.a},{self.b})"


def enumerate_labels(N: int, kinds=KINDS) -> Iterator[BasisLabel]:
    """Canonical labels with indices ``<= N``, family by family."""
    for kind in kinds:
        for a in range(1, N + 1):
            if kind == "muRe":
                bs = range(1, a)
            elif kind == "muIm":
                bs = range(1, a + 1)
            else:
                bs = range(-1, -a - 1, -1)
            for b in bs:
                yield BasisLabel(kind, a, b)


def _raw_terms(label: BasisLabel):
    k, a, b = label
    if k == "muRe":
        return [((a, b), 1), ((b, a), -1), ((-a, -b), 1), ((-b, -a), -1)]
    if k == "muIm":
        return [((a, b), 1j), ((b, a), 1j), ((-a, -b), -1j), ((-b, -a), -1j)]
    if k == "nuRe":
        return [((a, b), 1), ((-b, -a), 1), ((-a, -b), 1), ((b, a), 1)]
    return [((a, b), 1j), ((-b, -a), 1j), ((-a, -b), -1j), ((b, a), -1j)]


def basis_element(label, lam: LambdaSeq, window: ModeWindow | None = None,
                  normalized: bool = True) -> SpElem:
    """Element of the orthonormal sp basis B_lambda.

    ``muRe``: ``l_a l_b (e_ab - e_ba + e_-a-b - e_-b-a)``, ``a > b > 0``
    ``muIm``: ``i l_a l_b (e_ab + e_ba - e_-a-b - e_-b-a)``, ``a >= b > 0``
    ``nuRe``: ``l_a l_b (e_ab + e_-b-a + e_-a-b + e_ba)``, ``a >= -b > 0``
    ``nuIm``: ``i l_a l_b (e_ab + e_-b-a - e_-a-b - e_ba)``, ``a >= -b > 0``

    For ``|a| == |b|`` these formulas double up to norm ``sqrt 2``; with
    ``normalized=True`` (default) the result is scaled to unit norm.
    """
    label = BasisLabel(*label)
    window = window or ModeWindow(lam.N)
    label.validate(window.N)
    c = lam(label.a) * lam(label.b)
    out = defaultdict(complex)
    for key, v in _raw_terms(label):
        out[key] += c * v
    if normalized and label.degenerate:
        for key in out:
            out[key] /= math.sqrt(2)
    return SpElem(window, out)


def label_of_pair(m: int, k: int, imag: bool):
    """Canonical label whose element contains ``e_mk`` (or ``i e_mk``).

    Returns ``(label, weight)`` where ``weight = |pi(e_mk)|^2``, or ``None``
    when ``pi(e_mk)`` vanishes (real diagonal of the same-sign blocks).
    """
    if m * k > 0:
        a, b = max(abs(m), abs(k)), min(abs(m), abs(k))
        if a == b:
            return (BasisLabel("muIm", a, a), 2.0) if imag else None
        return BasisLabel("muIm" if imag else "muRe", a, b), 1.0
    p, q = (m, k) if m > 0 else (k, m)
    a, b = (p, q) if p >= -q else (-q, -p)
    return BasisLabel("nuIm" if imag else "nuRe", a, b), (2.0 if a == -b else 1.0)


# --- projection --------------------------------------------------------------

def project_sp(M) -> SpElem:
    """Orthogonal projection onto sp for the canonical metric.

    ``P(M) = (M + conj(M) - M# - conj(M)#) / 4``.  Idempotent, and
    ``M - P(M)`` is orthogonal to sp.
    """
    A = _dense(M)
    C = conj_op(A)
    return SpElem.from_dense(0.25 * (A + C - sharp(A) - sharp(C)))


def pi_basis(m: int, n: int, imag: bool, window: ModeWindow) -> SpElem:
    """Image of a basis matrix ``e_mn`` (or ``i e_mn``) under the labelling map.

    This map sends each basis matrix to the canonical sp element it labels;
    it equals ``2 * project_sp`` and is not idempotent.
    """
    E = np.zeros((window.size, window.size), complex)
    E[window.slot(m), window.slot(n)] = 1j if imag else 1.0
    return project_sp(E) * 2


# --- covariance --------------------------------------------------------------

@dataclass(frozen=True)
class CovSpec:
    """Diagonal covariance on the canonical basis.

    Presets: ``zero``; ``uniform`` (value ``q`` on labels with
    ``max(|a|,|b|) <= K``); ``power`` (``(|a||b|)^-p``, ``p > 1``);
    ``explicit`` (``{BasisLabel: value}``, unlisted labels are 0).
    """

    preset: str = "zero"
    q: float = 1.0
    K: int | None = None
    p: float = 2.0
    explicit: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.preset not in ("zero", "uniform", "power", "explicit"):
            raise CovSpecError(f"unknown preset {self.preset!r}")
        if self.preset == "uniform":
            if self.q < 0 or self.K is None or self.K < 1:
                raise CovSpecError("uniform preset needs q >= 0 and K >= 1")
        if self.preset == "power" and not self.p > 1:
            raise CovSpecError(f"power preset needs p > 1, got {self.p}")
        for lab, v in self.explicit.items():
            BasisLabel(*lab).validate()
            if not (v >= 0 and math.isfinite(v)):
                raise CovSpecError(f"covariance of {lab} must be finite and >= 0, got {v}")

    def __call__(self, label) -> float:
        kind, a, b = label
        if self.preset == "zero":
            return 0.0
        if self.preset == "uniform":
            return self.q if max(abs(a), abs(b)) <= self.K else 0.0
        if self.preset == "power":
            return float(abs(a) * abs(b)) ** (-self.p)
        return float(self.explicit.get(BasisLabel(*label), 0.0))

    @classmethod
    def uniform(cls, q: float, K: int) -> "CovSpec":
        return cls("uniform", q=q, K=K)

    @classmethod
    def power(cls, p: float) -> "CovSpec":
        return cls("power", p=p)

    @classmethod
    def from_dict(cls, d: dict) -> "CovSpec":
        if not isinstance(d, dict) or "preset" not in d:
            raise CovSpecError("covariance config must be an object with a 'preset' field")
        try:
            preset = d["preset"]
            if preset == "uniform":
                return cls.uniform(float(d["q"]), int(d["K"]))
            if preset == "power":
                return cls.power(float(d["p"]))
            if preset == "explicit":
                rows = {BasisLabel(str(r[0]), int(r[1]), int(r[2])): float(r[3])
                        for r in d.get("rows", [])}
                return cls("explicit", explicit=rows)
            return cls(preset)
        except (KeyError, TypeError, IndexError, ContractError) as exc:
            raise CovSpecError(f"bad covariance config: {exc}") from exc
        except ValueError as exc:
            raise CovSpecError(str(exc)) from exc

    @classmethod
    def from_file(cls, path) -> "CovSpec":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CovSpecError(f"cannot read covariance file {path}: {exc}") from exc
        return cls.from_dict(data)

    @classmethod
    def parse(cls, text: str) -> "CovSpec":
        """``zero | uniform:q,K | power:p | file:path``."""
        kind, _, arg = text.partition(":")
        try:
            if kind == "zero":
                return cls()
            if kind == "uniform":
                q, K = arg.split(",")
                return cls.uniform(float(q), int(K))
            if kind == "power":
                return cls.power(float(arg))
        except ValueError as exc:
            raise CovSpecError(f"bad covariance spec {text!r}: {exc}") from exc
        if kind == "file":
            return cls.from_file(arg)
        raise CovSpecError(f"bad covariance spec {text!r}")

    def to_dict(self) -> dict:
        d = {"preset": self.preset}
        if self.preset == "uniform":
            d.update(q=self.q, K=self.K)
        elif self.preset == "power":
            d["p"] = self.p
        elif self.preset == "explicit":
            d["rows"] = [[l.kind, l.a, l.b, v] for l, v in sorted(self.explicit.items())]
        return d


def drift_matrix(Q: CovSpec, window: ModeWindow) -> np.ndarray:
    """Diagonal Ito correction ``D_m = -1/4 sgn(m) sum_k sgn(k) [Q^Re_mk + Q^Im_mk]``.

    ``Q^Re_mk`` is the covariance evaluated on ``pi(e_mk)``, i.e. the weight
    of the label containing ``(m, k)`` times ``|pi(e_mk)|^2``.  The sum runs
    over ``|k| <= N``.  Returned in slot order.
    """
    D = np.zeros(window.size)
    for i, m in enumerate(window.indices):
        tot = 0.0
        for k in window.indices:
            for imag in (False, True):
                hit = label_of_pair(int(m), int(k), imag)
                if hit is not None:
                    lab, w = hit
                    tot += np.sign(k) * w * Q(lab)
        D[i] = -0.25 * np.sign(m) * tot
    return D


def sum_xi(Q: CovSpec, window: ModeWindow) -> SpElem:
    """``sum_xi (Q^1/2 xi)(Q^1/2 xi)#`` over the canonical basis."""
    lam = LambdaSeq.canonical(window.N)
    out = SpElem(window)
    for lab in enumerate_labels(window.N):
        q = Q(lab)
        if q == 0:
            continue
        e = basis_element(lab, lam, window)
        out = out + (e @ e.sharp()) * q
    return out


def sum_xi_residual(Q: CovSpec, window: ModeWindow) -> float:
    """Max-entry deviation of :func:`sum_xi` from ``-D``."""
    return float(np.max(np.abs(sum_xi(Q, window).to_dense() + np.diag(drift_matrix(Q, window)))))
