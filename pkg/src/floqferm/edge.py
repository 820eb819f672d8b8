"""Boundary-localized i0 modes: transfer matrix, boundary matrix, kernels.

A candidate mode F = sum_j v_{2j-1} a_j + v_{2j} b_j anticommutes with the
drive iff its canonically ordered coefficient vector F0 = (v_2, v_1, v_4,
v_3, ...) satisfies (V + 1) F0 = 0; commuting modes replace +1 by -1.  For
the measurement-plus-rotation drive the 2L anticommutation equations close
into a 2x2 transfer recursion whose contracting eigenvalue

    lambda_1 = i cot(h_y) coth(beta)

sets the decay rate; |lambda_1| < 1 is exactly the oscillatory-phase
condition cosh(2 beta) cos(2 h_y) < -1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._banded import smallest_eigenvalue_shifted_mp
from .errors import (
    ConfigError,
    NoCandidateMode,
    NotLocalized,
    SingularParameters,
)
from .fitting import FitResult, linear_fit
from .model import ModelParams
from .spectrum import FloquetMatrix, build_floquet_matrix

_TINY = 1e-12


def _alphas(beta: float, h_y: float) -> tuple:
    return (
        np.cos(2 * h_y),
        np.sin(2 * h_y),
        np.cosh(2 * beta),
        1j * np.sinh(2 * beta),
    )


@dataclass(frozen=True)
class TransferMatrix:
    """2x2 propagation of edge-mode coefficient pairs, bulk site to site."""

    entries: np.ndarray
    alphas: tuple
    beta: float
    h_y: float

    def det(self) -> complex:
        return complex(np.linalg.det(self.entries))

    def eigenvalues(self) -> tuple:
        """(contracting, expanding) eigenvalue, closed form."""
        return (
            contracting_eigenvalue(self.beta, self.h_y),
            expanding_eigenvalue(self.beta, self.h_y),
        )


def contracting_eigenvalue(beta: float, h_y: float) -> complex:
    """lambda_1 = i cot(h_y) coth(beta)."""
    return 1j / (np.tan(h_y) * np.tanh(beta))


def expanding_eigenvalue(beta: float, h_y: float) -> complex:
    """lambda_2 = -i tan(h_y) tanh(beta) = 1 / lambda_1."""
    return -1j * np.tan(h_y) * np.tanh(beta)


def transfer_matrix(beta: float, h_y: float) -> TransferMatrix:
    """Bulk recursion matrix T with (v_{2j+2}, v_{2j+1}) = T (v_{2j}, v_{2j-1})."""
    a1, a2, a3, a4 = _alphas(beta, h_y)
    if abs(a2) < _TINY or abs(np.sinh(2 * beta)) < _TINY:
        raise SingularParameters("transfer matrix needs sin(2 h_y) != 0 and beta != 0")
    T = -np.array(
        [
            [((a1 + a3) ** 2 + a4**2) / (a4 * a2), (a1 + a3) / a4],
            [(a1 + a3) / a4, a2 / a4],
        ],
        dtype=complex,
    )
    return TransferMatrix(entries=T, alphas=(a1, a2, a3, a4), beta=beta, h_y=h_y)


@dataclass
class EdgeMode:
    """Boundary mode coefficients v_1 ... v_{2L}.

    ``coeffs[2(j-1)]`` is v_{2j-1} (the a_j weight) and ``coeffs[2j-1]`` is
    v_{2j} (the b_j weight).  ``sign`` is -1 for anticommuting modes, +1
    for commuting ones.  Unit norm, global phase fixed by making the
    largest-magnitude coefficient real positive.
    """

    coeffs: np.ndarray
    side: str = "left"
    sign: int = -1
    defect: float | None = None

    @property
    def L(self) -> int:
        return len(self.coeffs) // 2

    def f0(self) -> np.ndarray:
        """Canonical Majorana ordering (v_2, v_1, v_4, v_3, ...)."""
        return _pair_swap(self.coeffs)

    def pair_norms(self) -> np.ndarray:
        c = self.coeffs.reshape(-1, 2)
        return np.sqrt(np.abs(c[:, 0]) ** 2 + np.abs(c[:, 1]) ** 2)

    def decay_fit(self, window: slice | None = None) -> FitResult:
        """Least-squares slope of ln(pair norm) vs site over the fit window."""
        norms = self.pair_norms()
        if window is None:
            window = default_fit_window(self.L, self.side)
        sites = np.arange(1, self.L + 1)[window]
        vals = norms[window]
        mask = vals > 0
        return linear_fit(sites[mask], np.log(vals[mask]))


def default_fit_window(L: int, side: str = "left") -> slice:
    """Sites 2 .. L/4 (mirrored for right modes); boundary site is off-asymptote."""
    hi = max(L // 4, min(5, L - 1))
    if side == "right":
        return slice(L - hi, L - 1)
    return slice(1, hi)


def _pair_swap(vec: np.ndarray) -> np.ndarray:
    out = vec.reshape(-1, 2)[:, ::-1].reshape(-1)
    return np.ascontiguousarray(out)


def _finalize(coeffs: np.ndarray, side: str, sign: int, defect=None) -> EdgeMode:
    coeffs = np.asarray(coeffs, dtype=complex)
    coeffs = coeffs / np.linalg.norm(coeffs)
    k = int(np.abs(coeffs).argmax())
    phase = coeffs[k] / abs(coeffs[k])
    return EdgeMode(coeffs=coeffs / phase, side=side, sign=sign, defect=defect)


def analytic_edge_mode(beta: float, h_y: float, L: int, side: str = "left") -> EdgeMode:
    """Closed-form boundary mode (J_xx = J_zz = 0).

    Left mode: (v_{2j}, v_{2j-1}) = lambda_1^{j-1} (cos h, sin h); the right
    mode starts from the other boundary equation and runs the recursion
    backwards, which contracts at the same rate.
    """
    lam1 = contracting_eigenvalue(beta, h_y)
    if abs(lam1) >= 1.0:
        raise NotLocalized(
            f"|lambda_1| = {abs(lam1):.4f} >= 1; no normalizable boundary mode"
        )
    coeffs = np.zeros(2 * L, dtype=complex)
    c, s = np.cos(h_y), np.sin(h_y)
    if side == "left":
        fac = lam1 ** np.arange(L)
        coeffs[0::2] = s * fac  # v_{2j-1}
        coeffs[1::2] = c * fac  # v_{2j}
    elif side == "right":
        fac = (1.0 / expanding_eigenvalue(beta, h_y)) ** np.arange(L - 1, -1, -1)
        coeffs[0::2] = -c * fac
        coeffs[1::2] = s * fac
    else:
        raise ConfigError("side must be 'left' or 'right'")
    return _finalize(coeffs, side, -1)


def boundary_matrix_m(params: ModelParams) -> np.ndarray:
    """Matrix of the 2L anticommutation equations for an open chain.

    With J_xx = 0 this is the closed-form tridiagonal-with-corners system in
    the coefficient ordering (v_1 ... v_{2L}); with J_xx != 0 the analogous
    banded system is assembled numerically from the one-period factor
    blocks, pair-swapped into the same ordering.  Requires J_zz = 0.
    """
    if params.bc != "open":
        raise ConfigError("boundary equations are defined for open chains")
    if any(j != 0.0 for j in params.j_zz) or any(j != 0.0 for j in params.j_yy):
        raise ConfigError("boundary matrix supports j_zz = j_yy = 0 only")
    if len(set(params.h_y)) > 1 or params.disorder.kind != "none":
        raise ConfigError("boundary matrix needs a uniform Y field")
    L = params.L
    if all(j == 0.0 for j in params.j_xx):
        a1, a2, a3, a4 = _alphas(params.beta, params.h_y[0])
        M = np.zeros((2 * L, 2 * L), dtype=complex)
        M[0, 0], M[0, 1] = a1 + 1, -a2
        for j in range(1, L):
            r = 2 * j - 1  # row for b_j
            M[r, r - 1], M[r, r], M[r, r + 1] = a2, a1 + a3, a4
            r = 2 * j  # row for a_{j+1}
            M[r, r - 1], M[r, r], M[r, r + 1] = -a4, a1 + a3, -a2
        M[2 * L - 1, 2 * L - 2], M[2 * L - 1, 2 * L - 1] = a2, a1 + 1
        return M
    V = build_floquet_matrix(params).entries
    K = V + np.eye(2 * L)
    perm = np.arange(2 * L).reshape(-1, 2)[:, ::-1].reshape(-1)
    return K[np.ix_(perm, perm)]


def smallest_m_eigenvalue(
    params: ModelParams,
    method: str = "auto",
    dps: int | None = None,
    float_floor: float = 1e-8,
) -> float:
    """Smallest |eigenvalue| of the boundary matrix.

    ``auto`` trusts double precision down to ``float_floor`` and reruns in
    arbitrary precision below it, where the true value would otherwise be
    buried in eigensolver noise.  The mp path works on the similar matrix
    V + 1 directly (same spectrum as the pair-swapped system).
    """
    if method not in ("auto", "float", "mp"):
        raise ConfigError(f"unknown method {method!r}")
    value = None
    if method in ("auto", "float"):
        M = boundary_matrix_m(params)
        value = float(np.abs(np.linalg.eigvals(M)).min())
        if method == "float" or value >= float_floor:
            return value
    return smallest_eigenvalue_shifted_mp(params, shift=1.0, dps=dps)


def _localized_combination(vectors: np.ndarray, side: str) -> np.ndarray:
    """Combination of near-degenerate columns with least weight off ``side``.

    The penalty mask is constant per site, so it works in both the
    coefficient and the canonical Majorana orderings.
    """
    n = vectors.shape[0]
    if vectors.shape[1] == 1:
        return vectors[:, 0]
    q, _ = np.linalg.qr(vectors)
    half = np.zeros(n)
    if side == "left":
        half[n // 2 :] = 1.0
    elif side == "right":
        half[: n // 2] = 1.0
    else:
        raise ConfigError("side must be 'left' or 'right'")
    w = np.linalg.eigh(q.conj().T @ (half[:, None] * q))[1][:, 0]
    return q @ w


def floquet_kernel_mode(
    V: FloquetMatrix | np.ndarray,
    sign: int = -1,
    side: str = "left",
    defect_tol: float | None = None,
) -> EdgeMode:
    """Boundary mode from the eigenvector of V nearest -1 (or +1).

    When several eigenvalues sit within tolerance of the target (the two
    boundary modes hybridize at finite size), the combination localized on
    the requested side is extracted from the candidate subspace.
    """
    mat = V.entries if isinstance(V, FloquetMatrix) else np.asarray(V)
    n = mat.shape[0]
    if sign not in (-1, +1):
        raise ConfigError("sign must be -1 (anticommuting) or +1 (commuting)")
    if defect_tol is None:
        defect_tol = 1e-6 * n
    target = float(sign)
    vals, vecs = np.linalg.eig(mat)
    dist = np.abs(vals - target)
    candidates = np.nonzero(dist <= defect_tol)[0]
    if candidates.size == 0:
        raise NoCandidateMode(
            f"nearest eigenvalue to {target} is {dist.min():.3e} away "
            f"(tolerance {defect_tol:.3e})"
        )
    x = _localized_combination(vecs[:, candidates], side)
    defect = float(np.linalg.norm(mat @ x - target * x) / np.linalg.norm(x))
    return _finalize(_pair_swap(x), side, sign, defect=defect)


def boundary_matrix_mode(
    params: ModelParams, side: str = "left", degeneracy_ratio: float = 10.0
):
    """(smallest |eigenvalue|, localized eigenvector mode) of the boundary matrix."""
    M = boundary_matrix_m(params)
    vals, vecs = np.linalg.eig(M)
    absvals = np.abs(vals)
    smallest = float(absvals.min())
    candidates = np.nonzero(absvals <= degeneracy_ratio * max(smallest, 1e-300))[0]
    x = _localized_combination(vecs[:, candidates], side)
    return smallest, _finalize(x, side, -1)


@dataclass
class ModeReport:
    """verify_mode output; linear-in-Majoranas structure makes the parity
    anticommutation and the square-to-identity conditions automatic."""

    defect: float
    defect_ok: bool
    parity_anticommutes: bool
    squares_to_identity: bool
    decay: FitResult

    def to_dict(self) -> dict:
        return {
            "defect": self.defect,
            "defect_ok": self.defect_ok,
            "parity_anticommutes": self.parity_anticommutes,
            "squares_to_identity": self.squares_to_identity,
            "decay": self.decay.to_dict(),
        }


def verify_mode(
    V: FloquetMatrix | np.ndarray,
    mode: EdgeMode,
    defect_tol: float | None = None,
) -> ModeReport:
    """Check (V - sign) F0 ~ 0 and report the decay-fit quality."""
    mat = V.entries if isinstance(V, FloquetMatrix) else np.asarray(V)
    n = mat.shape[0]
    if defect_tol is None:
        defect_tol = 1e-6 * n
    f0 = mode.f0()
    f0 = f0 / np.linalg.norm(f0)
    defect = float(np.linalg.norm(mat @ f0 - mode.sign * f0))
    return ModeReport(
        defect=defect,
        defect_ok=defect <= defect_tol,
        parity_anticommutes=True,
        squares_to_identity=True,
        decay=mode.decay_fit(),
    )
