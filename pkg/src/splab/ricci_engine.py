"""Levi-Civita connection, curvature and truncated Ricci curvature on sp.

Elements are handled as :class:`XiCombo`, real combinations of the
orthonormal frame ``xi_ab = 2 lambda_a lambda_b e_ab`` and ``i xi_ab``.
Two independent routes to the connection are provided:

* :func:`nabla` evaluates the closed six-term formulas for
  ``nabla_{xi_ab} xi_cd`` and its three ``i``-variants, extended bilinearly;
* :func:`nabla_oracle` solves Milnor's formula
  ``<nabla_x y, z> = 1/2 (<[x,y],z> - <[y,z],x> + <[z,x],y>)``
  against every frame element on an index set, with brackets formed as
  matrix commutators.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .fourier_core import ContractError, ModeWindow
from .sp_algebra import BasisLabel, LambdaSeq, SpElem, basis_element, enumerate_labels

RE, IM = 0, 1
_PART_NAMES = {RE: "Re", IM: "Im", "Re": RE, "Im": IM}


class XiCombo(dict):
    """Sparse real combination ``{(a, b, part): coeff}``; part 0 is xi, 1 is i xi."""

    def __add__(self, other):
        out = XiCombo(self)
        for k, v in other.items():
            out[k] = out.get(k, 0.0) + v
        return out

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def scale(self, c: float) -> "XiCombo":
        return XiCombo({k: c * v for k, v in self.items()})

    def dot(self, other) -> float:
        """Inner product; the frame is orthonormal."""
        small, big = (self, other) if len(self) <= len(other) else (other, self)
        return sum(v * big.get(k, 0.0) for k, v in small.items())

    def pruned(self, tol: float = 0.0) -> "XiCombo":
        return XiCombo({k: v for k, v in self.items() if abs(v) > tol})

    def max_abs(self) -> float:
        return max((abs(v) for v in self.values()), default=0.0)

    def indices(self) -> set:
        return {i for (a, b, _) in self for i in (a, b)}

    @classmethod
    def term(cls, a: int, b: int, part=RE, coeff: float = 1.0) -> "XiCombo":
        part = _PART_NAMES[part] if isinstance(part, str) else part
        return cls({(a, b, part): float(coeff)})


def to_xicombo(x: SpElem, lam: LambdaSeq) -> XiCombo:
    """Coefficient extraction: Re/Im of ``x_ab`` divided by ``2 lambda_a lambda_b``."""
    out = XiCombo()
    for (a, b), v in x.entries.items():
        s = 2 * lam(a) * lam(b)
        if v.real != 0:
            out[(a, b, RE)] = v.real / s
        if v.imag != 0:
            out[(a, b, IM)] = v.imag / s
    return out


def to_spelem(x: XiCombo, lam: LambdaSeq, window: ModeWindow) -> SpElem:
    out = defaultdict(complex)
    for (a, b, p), c in x.items():
        out[(a, b)] += c * 2 * lam(a) * lam(b) * (1j if p else 1)
    return SpElem(window, out)


def basis_combo(label, lam: LambdaSeq, normalized: bool = True) -> XiCombo:
    return to_xicombo(basis_element(label, lam, ModeWindow(lam.N), normalized), lam)


def _window_for(lam: LambdaSeq, *combos) -> ModeWindow:
    idx = set().union(*(c.indices() for c in combos)) if combos else set()
    return ModeWindow(max([lam.N] + [abs(i) for i in idx]))


def xi_bracket(x: XiCombo, y: XiCombo, lam: LambdaSeq) -> XiCombo:
    """``[x, y]`` as a matrix commutator, decomposed back into the frame."""
    w = _window_for(lam, x, y)
    X, Y = to_spelem(x, lam, w), to_spelem(y, lam, w)
    return to_xicombo(X @ Y - Y @ X, lam).pruned()


# --- connection from the closed formulas -------------------------------------

# Each formula has the same six delta terms; they differ by signs and output part.
# term: (delta condition, lambda index, output pair)
def _six(a, b, c, d):
    return ((b == c, c, (a, d)), (d == a, a, (c, b)), (c == a, d, (d, b)),
            (d == b, c, (a, c)), (b == d, a, (c, a)), (a == c, b, (b, d)))


_SIGNS = {
    (RE, RE): ((1, -1, -1, 1, 1, -1), RE),
    (IM, IM): ((-1, 1, -1, 1, 1, -1), RE),
    (RE, IM): ((1, -1, 1, -1, 1, -1), IM),
    (IM, RE): ((1, -1, -1, 1, -1, 1), IM),
}


def nabla(x: XiCombo, y: XiCombo, lam: LambdaSeq) -> XiCombo:
    """Levi-Civita connection ``nabla_x y`` from the frame formulas.

    ``nabla_{xi_ab} xi_cd = d_bc l_c^2 xi_ad - d_da l_a^2 xi_cb - d_ca l_d^2 xi_db
    + d_db l_c^2 xi_ac + d_bd l_a^2 xi_ca - d_ac l_b^2 xi_bd`` and the three
    variants with ``i xi`` arguments (signs in ``_SIGNS``).
    """
    out = defaultdict(float)
    for (a, b, p), cx in x.items():
        for (c, d, q), cy in y.items():
            signs, part = _SIGNS[(p, q)]
            for s, (hit, li, (u, v)) in zip(signs, _six(a, b, c, d)):
                if hit:
                    out[(u, v, part)] += s * cx * cy * lam(li) ** 2
    return XiCombo(out).pruned()


# --- connection from Milnor's formula ----------------------------------------

def _frame_stack(window: ModeWindow, lam: LambdaSeq):
    idx = window.indices
    n = window.size
    keys, mats = [], []
    for i, a in enumerate(idx):
        for j, b in enumerate(idx):
            for p in (RE, IM):
                M = np.zeros((n, n), complex)
                M[i, j] = 2 * lam(a) * lam(b) * (1j if p else 1)
                keys.append((int(a), int(b), p))
                mats.append(M)
    return keys, np.array(mats)


def _ip_batch(A, B, W):
    # inner_lambda, batched over the leading axis of either argument
    return np.sum(W * (A.real * B.real + A.imag * B.imag), axis=(-2, -1))


def nabla_oracle(x: XiCombo, y: XiCombo, lam: LambdaSeq, index_set: Iterable[int] | None = None,
                 tol: float = 0.0) -> XiCombo:
    """``nabla_x y`` by pairing Milnor's formula with every frame element.

    ``index_set`` bounds the frame ``{xi_ef, i xi_ef : e, f in index_set}``;
    it must contain every index of x and y and their negations.  Given as a
    set of indices it is widened to the symmetric window it spans.
    """
    need = x.indices() | y.indices()
    need |= {-i for i in need}
    if index_set is None:
        index_set = need
    index_set = set(index_set)
    if not need <= index_set:
        raise ContractError(f"index set misses {sorted(need - index_set)}")
    window = ModeWindow(max([1] + [abs(i) for i in index_set]))
    keys, Z = _frame_stack(window, lam)
    X = to_spelem(x, lam, window).to_dense()
    Y = to_spelem(y, lam, window).to_dense()
    L = lam.on_window(window) ** 2
    W = 1.0 / (4 * np.outer(L, L))
    xy = X @ Y - Y @ X
    yz = Y @ Z - Z @ Y
    zx = Z @ X - X @ Z
    coef = 0.5 * (_ip_batch(xy[None], Z, W) - _ip_batch(yz, X[None], W) + _ip_batch(zx, Y[None], W))
    return XiCombo({k: float(c) for k, c in zip(keys, coef) if abs(c) > tol})


# --- curvature ---------------------------------------------------------------

Connection = Callable[[XiCombo, XiCombo, LambdaSeq], XiCombo]


def riemann(x, y, z, lam: LambdaSeq, connection: Connection = nabla) -> XiCombo:
    """``R_xy(z) = nabla_[x,y] z - nabla_x nabla_y z + nabla_y nabla_x z``."""
    xy = xi_bracket(x, y, lam)
    return (connection(xy, z, lam) - connection(x, connection(y, z, lam), lam)
            + connection(y, connection(x, z, lam), lam))


def sectional(x, y, lam: LambdaSeq, connection: Connection = nabla) -> float:
    """``K(x, y) = <R_xy(x), y>`` (not normalized by the area of x, y)."""
    return riemann(x, y, x, lam, connection).dot(y)


def ricci_truncated(label, lam: LambdaSeq, N: int, connection: Connection = nabla,
                    terms: bool = False):
    """Brute-force ``Ric^N(x) = sum K(x, xi)`` over the unit basis with indices ``<= N``.

    The sum runs over the four families in canonical order.  With
    ``terms=True`` the individual sectional curvatures are returned too.
    """
    if lam.N < N:
        raise ContractError(f"lambda has {lam.N} values, need {N}")
    lam = LambdaSeq(lam.values[:N])
    label = BasisLabel(*label).validate(N)
    x = basis_combo(label, lam)
    nxx = connection(x, x, lam)
    total, parts = 0.0, []
    for lab in enumerate_labels(N):
        y = basis_combo(lab, lam)
        # R_xy(x) with nabla_x x reused across the sum
        xy = xi_bracket(x, y, lam)
        R = (connection(xy, x, lam) - connection(x, connection(y, x, lam), lam)
             + connection(y, nxx, lam))
        k = R.dot(y)
        total += k
        if terms:
            parts.append((lab, k))
    return (total, parts) if terms else total


# --- closed forms ------------------------------------------------------------

# coefficients of the shared template, see ricci_closed_form
_OFFDIAG = {
    "muRe": (-24, -24, 48, -12, 8, 8, -12),
    "muIm": (-40, -40, -32, -12, -8, -8, -12),
    "nuRe": (-40, -40, -48, -12, -8, -8, -12),
    "nuIm": (-40, -40, -32, -12, -8, -8, -12),
}


def ricci_closed_form(label, lam: LambdaSeq, N: int) -> float:
    """Closed-form ``Ric^N`` for a basis label.

    Off-diagonal labels share the template::

        1/16 [ k1 La^2 + k2 Lb^2 + k3 La Lb
               + k4 La S2(<a) + k5 La S2(<b) + k6 Lb S2(<a) + k7 Lb S2(<b)
               + 8 S4(<a) + 8 S4(<b) - 16 N (La^2 + Lb^2)
               + k4 La S2(>a) + k5 La S2(>b) + k6 Lb S2(>a) + k7 Lb S2(>b)
               + 8 S4(>a) + 8 S4(>b) ]

    with ``La = lambda_a^2``, ``S2(<a) = sum_{d<a} lambda_d^2``,
    ``S4(>a) = sum_{a<c<=N} lambda_c^4``, and ``|b|`` in place of b for the
    nu families.  The degenerate labels have their own short formulas.
    """
    label = BasisLabel(*label).validate(N)
    kind, a, b = label
    b = abs(b)
    l2 = np.array([lam(i) ** 2 for i in range(1, N + 1)])
    l4 = l2 ** 2

    def below(v, i):
        return float(v[: i - 1].sum())

    def above(v, i):
        return float(v[i:].sum())

    La, Lb = l2[a - 1], l2[b - 1]
    if a == b:
        if kind in ("muIm", "nuIm"):
            return 0.0
        # nuRe with a = -b
        return (-192 * La ** 2 - 32 * below(l4, a) - 192 * N * La ** 2 - 32 * above(l4, a)) / 16
    k1, k2, k3, k4, k5, k6, k7 = _OFFDIAG[kind]
    tot = k1 * La ** 2 + k2 * Lb ** 2 + k3 * La * Lb - 16 * N * (La ** 2 + Lb ** 2)
    for part in (below, above):
        tot += (k4 * La * part(l2, a) + k5 * La * part(l2, b) + k6 * Lb * part(l2, a)
                + k7 * Lb * part(l2, b) + 8 * part(l4, a) + 8 * part(l4, b))
    return tot / 16


def canonical_closed_form(label, N: int) -> float:
    """The closed forms at ``lambda = 1/sqrt 2``, as linear functions of N."""
    kind, a, b = BasisLabel(*label)
    if abs(a) == abs(b) and kind in ("muIm", "nuIm"):
        return 0.0
    if kind == "nuRe" and a == -b:
        return -3.5 * N - 2.5
    slope, icpt = {"muRe": (-3 / 8, -1 / 8), "muIm": (-7 / 8, -11 / 8),
                   "nuRe": (-7 / 8, -13 / 8), "nuIm": (-7 / 8, -11 / 8)}[kind]
    return slope * N + icpt


@dataclass(frozen=True)
class CurvatureReport:
    label: BasisLabel
    N: int
    brute: float
    closed_form: float

    @property
    def abs_diff(self) -> float:
        return abs(self.brute - self.closed_form)

    def ok(self, rtol: float = 1e-9) -> bool:
        return self.abs_diff <= rtol * max(1.0, abs(self.closed_form))


def curvature_report(labels, lam: LambdaSeq, N: int, threads: int = 1) -> list[CurvatureReport]:
    """Brute force vs closed form for each label, in the given order."""
    labels = [BasisLabel(*l) for l in labels]

    def one(lab):
        return CurvatureReport(lab, N, ricci_truncated(lab, lam, N), ricci_closed_form(lab, lam, N))

    if threads <= 1:
        return [one(l) for l in labels]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(one, labels))


def parse_label_selection(text: str, N: int) -> list[BasisLabel]:
    """``all:<k>`` (every label with indices <= k) or ``kind:a,b[;kind:a,b...]``.

    Kinds accept ``muRe``/``mu_re`` style spellings.
    """
    names = {"mure": "muRe", "muim": "muIm", "nure": "nuRe", "nuim": "nuIm"}
    text = text.strip()
    if text.startswith("all:"):
        k = int(text[4:])
        if k > N:
            raise ContractError(f"label bound {k} exceeds N={N}")
        return list(enumerate_labels(k))
    out = []
    for chunk in text.split(";"):
        kind, _, ab = chunk.partition(":")
        key = names.get(kind.replace("_", "").lower())
        if key is None:
            raise ContractError(f"unknown label kind {kind!r}")
        try:
            a, b = (int(s) for s in ab.split(","))
        except ValueError as exc:
            raise ContractError(f"bad label {chunk!r}") from exc
        out.append(BasisLabel(key, a, b).validate(N))
    return out


def fit_line(Ns, values) -> tuple[float, float]:
    """Least-squares slope and intercept."""
    slope, icpt = np.polyfit(np.asarray(Ns, float), np.asarray(values, float), 1)
    return float(slope), float(icpt)


__all__ = [
    "XiCombo", "RE", "IM", "to_xicombo", "to_spelem", "basis_combo", "xi_bracket", "nabla",
    "nabla_oracle", "riemann", "sectional", "ricci_truncated", "ricci_closed_form",
    "canonical_closed_form", "CurvatureReport", "curvature_report", "parse_label_selection", "fit_line",
]
