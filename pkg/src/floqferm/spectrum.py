"""Single-particle Floquet matrix, complex quasi-energies, phase diagram.

The one-period drive acts on the Majorana vector through

    V = exp(beta*H_zz) exp(-i*J_zz H_zz) exp(-i*J_xx H_xx) exp(-i*h H_y)

(rightmost factor first), each factor an exact product of commuting 2x2
block exponentials.  V is complex orthogonal (V^T V = 1), its eigenvalues
come in reciprocal pairs (m, 1/m), and the quasi-energies are
eps = (i/2) Log m on the principal branch.  Eigenvalues at m = -1 encode
a pair of modes at Re eps = +-pi/2 that the principal log cannot tell
apart; such pairs are flagged and their even degeneracy is checked.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    ConfigError,
    DegeneracyRepairFailed,
    AmbiguousClassification,
    IllConditioned,
    NonAntisymmetricInput,
    OverlappingBonds,
    PairingFailed,
)
from .fitting import FitResult, log_linear_fit
from .model import MajoranaMatrix, ModelParams, build_h_xx, build_h_y, build_h_zz

PHASE_OSCILLATORY = "oscillatory"
PHASE_TRIVIAL = "trivial-degenerate"
PHASE_GAPLESS = "gapless"

_COND_LIMIT = 1e10
_PAIR_TOL = 1e-6
_CLUSTER_TOL = 1e-9
_ARG_TOL = 1e-7


def exp_factor(matrix: MajoranaMatrix, scale: complex, weights=None) -> np.ndarray:
    """exp(scale * sum_b weight_b * H_b) for a disjoint-bond matrix.

    Each bond block [[0, v], [-v, 0]] exponentiates to the rotation-like
    [[cos t, sin t], [-sin t, cos t]] with t = scale*weight*v, which covers
    both the cos/sin and cosh/sinh cases since v is (+-)2i.
    """
    if not matrix.pairs_disjoint():
        raise OverlappingBonds("bonds share a Majorana index; split the matrix")
    n = matrix.dim
    if weights is None:
        weights = np.ones(len(matrix.pairs))
    else:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (len(matrix.pairs),):
            raise ConfigError(
                f"expected {len(matrix.pairs)} weights, got {weights.shape}"
            )
    out = np.eye(n, dtype=complex)
    for (mu, nu), w in zip(matrix.pairs, weights):
        t = scale * w * matrix.entries[mu, nu]
        c, s = np.cos(t), np.sin(t)
        out[mu, mu] = c
        out[nu, nu] = c
        out[mu, nu] = s
        out[nu, mu] = -s
    return out


@dataclass
class FloquetMatrix:
    """Single-particle one-period matrix acting on the Majorana vector.

    Built from antisymmetric generators, so complex orthogonal in exact
    arithmetic: the inverse is the transpose.
    """

    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def L(self) -> int:
        return self.dim // 2

    def inverse(self) -> np.ndarray:
        return self.entries.T.copy()

    def orthogonality_defect(self) -> float:
        n = self.dim
        return float(np.abs(self.entries.T @ self.entries - np.eye(n)).max())


def build_floquet_matrix(params: ModelParams, step: int = 0) -> FloquetMatrix:
    """Compose V from the exact block-exponential factors, rightmost first."""
    if any(j != 0.0 for j in params.j_yy):
        raise ConfigError("free-fermion drive requires j_yy = 0 (use the exact engine)")
    hzz = build_h_zz(params)
    hxx = build_h_xx(params)
    hy, fields = build_h_y(params, step)
    v = exp_factor(hzz, params.beta)
    v = v @ exp_factor(hzz, -1j, params.j_zz)
    v = v @ exp_factor(hxx, -1j, params.j_xx)
    v = v @ exp_factor(hy, -1j, fields)
    return FloquetMatrix(entries=v)


# ---------------------------------------------------------------------------
# Pairing of eigen-systems with (m, 1/m) or (lam, -lam) partner structure.
# ---------------------------------------------------------------------------


def _partner_value(value: complex, kind: str) -> complex:
    return 1.0 / value if kind == "floquet" else -value


def _group_values(vals: np.ndarray, tol: float):
    """Union-find grouping of nearly equal complex values (relative tol)."""
    n = len(vals)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    diff = np.abs(vals[:, None] - vals[None, :])
    scale = np.abs(vals)[:, None] + np.abs(vals)[None, :] + 1.0
    close = diff <= tol * scale
    for i in range(n):
        for j in np.nonzero(close[i, i + 1 :])[0] + i + 1:
            ri, rj = find(i), find(int(j))
            if ri != rj:
                parent[rj] = ri
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _congruence_to_identity(G: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """S with S^T G S = 1 for an invertible complex symmetric G."""
    n = G.shape[0]
    A = G.copy()
    S = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.abs(G).max()))
    for k in range(n):
        sub = np.abs(np.diag(A)[k:])
        if sub.max() <= tol * scale:
            # all remaining diagonals vanish; fold a large off-diagonal in
            off = np.abs(A[k:, k:])
            i, j = np.unravel_index(int(off.argmax()), off.shape)
            if off[i, j] <= tol * scale:
                raise DegeneracyRepairFailed("degenerate block is numerically singular")
            i, j = i + k, j + k
            A[:, i] += A[:, j]
            A[i, :] += A[j, :]
            S[:, i] += S[:, j]
            sub = np.abs(np.diag(A)[k:])
        p = int(sub.argmax()) + k
        if p != k:
            A[:, [k, p]] = A[:, [p, k]]
            A[[k, p], :] = A[[p, k], :]
            S[:, [k, p]] = S[:, [p, k]]
        d = np.sqrt(A[k, k] + 0j)
        A[:, k] /= d
        A[k, :] /= d
        S[:, k] /= d
        for j in range(k + 1, n):
            c = A[k, j]
            A[:, j] -= c * A[:, k]
            A[j, :] -= c * A[k, :]
            S[:, j] -= c * S[:, k]
    return S


def _paired_eigensystem(
    matrix: np.ndarray,
    kind: str,
    pair_tol: float = _PAIR_TOL,
    cluster_tol: float = _CLUSTER_TOL,
    cond_limit: float = _COND_LIMIT,
):
    """Eigen-decompose and enforce the bilinear pair structure.

    Returns (values, vectors, pairs) where pairs is an (n/2, 2) index array
    into values/vectors with v_rep^T v_partner = 1 and all other bilinear
    products zero.  For degenerate groups the two columns of a pair span the
    eigenspace but are not individually tied to the two raw eigenvalues.
    """
    vals, vecs = np.linalg.eig(matrix)
    n = len(vals)
    if n % 2:
        raise ConfigError("matrix dimension must be even")
    cond = np.linalg.cond(vecs)
    if not np.isfinite(cond) or cond > cond_limit:
        raise IllConditioned(f"eigenvector condition number {cond:.3e}")
    vals = vals.copy()
    vecs = vecs.copy()

    groups = _group_values(vals, cluster_tol)
    centroids = np.array([vals[g].mean() for g in groups])
    used = [False] * len(groups)
    pairs: list[tuple[int, int]] = []

    for gi, g in enumerate(groups):
        if used[gi]:
            continue
        target = _partner_value(centroids[gi], kind)
        dist = np.abs(centroids - target) / (1.0 + np.abs(target))
        dist[[i for i, u in enumerate(used) if u and i != gi]] = np.inf
        gj = int(dist.argmin())
        residual = float(dist[gj])
        if residual > pair_tol:
            raise PairingFailed(centroids[gi], residual)
        used[gi] = True
        if gj == gi:
            # self-paired group (m near +-1, or lam near 0): hyperbolic basis
            idx = list(g)
            if len(idx) % 2:
                raise PairingFailed(centroids[gi], residual)
            E = vecs[:, idx]
            G = E.T @ E
            S = _congruence_to_identity(G)
            Et = E @ S
            for k in range(0, len(idx), 2):
                vp = (Et[:, k] + 1j * Et[:, k + 1]) / np.sqrt(2.0)
                vm = (Et[:, k] - 1j * Et[:, k + 1]) / np.sqrt(2.0)
                vecs[:, idx[k]] = vp
                vecs[:, idx[k + 1]] = vm
                pairs.append((idx[k], idx[k + 1]))
        else:
            used[gj] = True
            g2 = groups[gj]
            if len(g) != len(g2):
                raise PairingFailed(centroids[gi], residual)
            # order members so products m*m' (or sums lam + lam') are closest
            g2 = list(g2)
            ordered = []
            for i in g:
                t = _partner_value(vals[i], kind)
                k = int(np.argmin(np.abs(vals[g2] - t)))
                ordered.append(g2.pop(k))
            A = vecs[:, g]
            B = vecs[:, ordered]
            G = A.T @ B
            try:
                B = B @ np.linalg.inv(G)
            except np.linalg.LinAlgError as exc:
                raise DegeneracyRepairFailed(str(exc)) from None
            vecs[:, ordered] = B
            pairs.extend(zip(g, ordered))
    return vals, vecs, np.array(pairs, dtype=int)


# ---------------------------------------------------------------------------
# Quasi-energy spectrum of V
# ---------------------------------------------------------------------------


def _rep_from_pair(m1: complex, m2: complex, arg_tol: float = _ARG_TOL):
    """Representative quasi-energy for a reciprocal eigenvalue pair.

    Returns (eps, rep_is_first, pi_branch).  The representative has positive
    real part, or positive imaginary part when the real part vanishes; pairs
    of negative-real eigenvalues sit on the log branch cut and are reported
    as Re eps = +pi/2 with Im eps = ln|m_big| / 2.
    """
    a1, a2 = np.angle(m1), np.angle(m2)
    pi_branch = (abs(a1) >= np.pi - arg_tol) and (abs(a2) >= np.pi - arg_tol)
    if pi_branch:
        big = m1 if abs(m1) >= abs(m2) else m2
        eps = np.pi / 2 + 0.5j * np.log(abs(big))
        return eps, abs(m1) >= abs(m2), True
    for m, first in ((m1, True), (m2, False)):
        a = np.angle(m)
        if a < -arg_tol:
            return 0.5j * np.log(m), first, False
    # both arguments ~ 0: positive real pair, eps ~ i ln|m| / 2
    big = m1 if abs(m1) >= abs(m2) else m2
    return 0.5j * np.log(big), abs(m1) >= abs(m2), False


@dataclass
class QuasiSpectrum:
    """L representative quasi-energies plus diagonalizing data.

    ``pairs`` holds one representative per (+eps, -eps) pair, ordered by
    descending imaginary part.  ``raw`` are the eigenvalues of V;
    ``pair_indices[k]`` points at the (rep, partner) eigenvalue columns of
    ``right``; after pairing, rep^T partner = 1 column-bilinear products.
    """

    pairs: np.ndarray
    raw: np.ndarray
    pair_indices: np.ndarray
    pi_branch: np.ndarray
    right: np.ndarray
    pi_half_degeneracy: int = 0

    @property
    def L(self) -> int:
        return len(self.pairs)

    def full_spectrum(self) -> np.ndarray:
        return np.concatenate([self.pairs, -self.pairs])

    def left(self) -> np.ndarray:
        """Left eigenvector matrix: row for raw index i is right[:, partner(i)]^T."""
        n = len(self.raw)
        out = np.zeros((n, n), dtype=complex)
        for i, j in self.pair_indices:
            out[i, :] = self.right[:, j]
            out[j, :] = self.right[:, i]
        return out

    def mid_gap_index(self) -> int:
        return int(np.abs(self.pairs.imag).argmin())

    def mid_gap_pair(self) -> complex:
        return complex(self.pairs[self.mid_gap_index()])

    def bulk_im_gap(self) -> float:
        """Min |Im eps| over pairs excluding the mid-gap pair."""
        im = np.abs(self.pairs.imag)
        k = self.mid_gap_index()
        rest = np.delete(im, k)
        return float(rest.min()) if rest.size else float(im[k])

    def mid_gap_splitting(self) -> float:
        """Real-part splitting of the two mid-gap modes, in [0, pi]."""
        return float(2.0 * abs(self.pairs[self.mid_gap_index()].real))


def quasi_energies(
    V: FloquetMatrix | np.ndarray,
    pair_tol: float = _PAIR_TOL,
    cond_limit: float = _COND_LIMIT,
) -> QuasiSpectrum:
    """Extract the complex quasi-energy spectrum of V.

    eps_j = (i/2) Log m_j on the principal branch; eigenvalues are paired
    into reciprocal partners, and pairs of negative-real eigenvalues are
    flagged (the two i0 modes at Re eps = +-pi/2 both land on m = -1, so
    only their even degeneracy is verified, not the sign).
    """
    mat = V.entries if isinstance(V, FloquetMatrix) else np.asarray(V)
    vals, vecs, pair_idx = _paired_eigensystem(
        mat, "floquet", pair_tol=pair_tol, cond_limit=cond_limit
    )
    reps = []
    flags = []
    ordered_idx = []
    for i, j in pair_idx:
        eps, first, branch = _rep_from_pair(vals[i], vals[j])
        reps.append(eps)
        flags.append(branch)
        ordered_idx.append((i, j) if first else (j, i))
    reps = np.array(reps)
    flags = np.array(flags, dtype=bool)
    ordered_idx = np.array(ordered_idx, dtype=int)
    order = np.argsort(-reps.imag, kind="stable")
    neg_count = int(np.sum(np.abs(np.angle(vals)) >= np.pi - _ARG_TOL))
    if np.any(flags) and neg_count % 2:
        raise PairingFailed(-1.0, float(neg_count))
    return QuasiSpectrum(
        pairs=reps[order],
        raw=vals,
        pair_indices=ordered_idx[order],
        pi_branch=flags[order],
        right=vecs,
        pi_half_degeneracy=int(flags.sum()),
    )


# ---------------------------------------------------------------------------
# Analytic momentum-space spectrum (J_xx = J_zz = 0, uniform fields)
# ---------------------------------------------------------------------------


def analytic_spectrum(beta: float, h_y: float, k: float):
    """Quasi-energy pair at momentum k for the measurement-plus-rotation drive.

    z(k) = cosh(2*beta) cos(2*h_y) + i sinh(2*beta) sin(2*h_y) cos(k); the
    two branch values m = z +- i sqrt(1 - z^2) multiply to 1, so they are
    particle-hole partners for either square-root branch.
    """
    z = np.cosh(2 * beta) * np.cos(2 * h_y) + 1j * np.sinh(2 * beta) * np.sin(
        2 * h_y
    ) * np.cos(k)
    root = 1j * np.sqrt(1.0 - z * z + 0j)
    m1, m2 = z + root, z - root
    eps, _, _ = _rep_from_pair(m1, m2)
    return eps, -eps


def momentum_grid(L: int, bc: str) -> np.ndarray:
    """Allowed momenta: (half-)integer multiples of 2*pi/L for (anti)periodic bc."""
    if bc == "periodic":
        n = np.arange(L)
    elif bc == "antiperiodic":
        n = np.arange(L) + 0.5
    else:
        raise ConfigError("momentum grid needs a closed chain")
    k = 2 * np.pi * n / L
    return np.where(k > np.pi, k - 2 * np.pi, k)


def analytic_quasi_energies(beta: float, h_y: float, L: int, bc: str) -> np.ndarray:
    """Pair representatives over the momentum grid (length L array)."""
    return np.array([analytic_spectrum(beta, h_y, k)[0] for k in momentum_grid(L, bc)])


def sorted_pair_representatives(values: np.ndarray, decimals: int = 9) -> np.ndarray:
    """Deterministic ordering for comparing representative multisets.

    Sort keys are rounded so float noise on degenerate entries cannot flip
    the ordering between two independently computed lists.
    """
    values = np.asarray(values)
    order = np.lexsort((np.round(values.imag, decimals), np.round(values.real, decimals)))
    return values[order]


# ---------------------------------------------------------------------------
# Phase classification
# ---------------------------------------------------------------------------


def gap_condition(beta: float, h_y: float) -> float:
    """cosh(2*beta)*cos(2*h_y); the imaginary gap is open iff |.| > 1."""
    return float(np.cosh(2 * beta) * np.cos(2 * h_y))


def classify_phase(
    beta: float | None = None,
    h_y: float | None = None,
    spectrum: QuasiSpectrum | None = None,
    gap_tol: float = 1e-3,
    split_tol: float = 1e-2,
    ambiguity_band: float = 2.0,
) -> str:
    """Label the bulk phase.

    Without a spectrum the closed-form gap condition decides (J = 0 only).
    With a spectrum, the call is decided by the bulk imaginary gap and the
    real-part splitting of the two mid-gap modes; a splitting of pi means
    oscillatory, zero means trivial-degenerate, anything else (or a closed
    gap) means gapless.
    """
    if spectrum is None:
        if beta is None or h_y is None:
            raise ConfigError("need (beta, h_y) or a spectrum")
        p = gap_condition(beta, h_y)
        if p < -1.0:
            return PHASE_OSCILLATORY
        if p > 1.0:
            return PHASE_TRIVIAL
        return PHASE_GAPLESS
    gap = spectrum.bulk_im_gap()
    if gap_tol < gap <= ambiguity_band * gap_tol:
        raise AmbiguousClassification(
            f"bulk imaginary gap {gap:.3e} inside the tolerance band "
            f"({gap_tol:.1e}, {ambiguity_band * gap_tol:.1e}]"
        )
    if gap <= gap_tol:
        return PHASE_GAPLESS
    split = spectrum.mid_gap_splitting()
    if abs(split - np.pi) < split_tol:
        return PHASE_OSCILLATORY
    if abs(split) < split_tol:
        return PHASE_TRIVIAL
    return PHASE_GAPLESS


# ---------------------------------------------------------------------------
# Direct diagonalization of antisymmetric coefficient matrices
# ---------------------------------------------------------------------------


@dataclass
class AntisymmetricDecomposition:
    """Pair spectrum (+-lam_j) and complex-orthogonal X with X^T H X = Sigma."""

    lams: np.ndarray
    raw: np.ndarray
    pair_indices: np.ndarray
    vectors: np.ndarray
    X: np.ndarray

    @property
    def L(self) -> int:
        return len(self.lams)

    def sigma(self) -> np.ndarray:
        n = 2 * self.L
        out = np.zeros((n, n), dtype=complex)
        for k, lam in enumerate(self.lams):
            out[2 * k, 2 * k + 1] = 1j * lam
            out[2 * k + 1, 2 * k] = -1j * lam
        return out


def _hamiltonian_rep_first(l1: complex, l2: complex, tol: float) -> bool:
    if abs(l1.real) > tol or abs(l2.real) > tol:
        return l1.real >= l2.real
    return l1.imag >= l2.imag


def diagonalize_hamiltonian(
    H: MajoranaMatrix | np.ndarray,
    asym_tol: float = 1e-10,
    orth_tol: float = 1e-8,
) -> AntisymmetricDecomposition:
    """Decompose an antisymmetric H into +-lam pairs and assemble X.

    lam_j is chosen with positive real part (positive imaginary part when
    purely imaginary); right eigenvectors are normalized to
    v_rep^T v_partner = 1, degenerate groups repaired to keep all other
    bilinear products zero, and X is verified complex orthogonal.
    """
    mat = H.entries if isinstance(H, MajoranaMatrix) else np.asarray(H, dtype=complex)
    scale = max(1.0, float(np.abs(mat).max()))
    if float(np.abs(mat + mat.T).max()) > asym_tol * scale:
        raise NonAntisymmetricInput("input matrix is not antisymmetric to tolerance")
    vals, vecs, pair_idx = _paired_eigensystem(mat, "hamiltonian")
    rtol = 1e-9 * scale
    lams = []
    ordered = []
    for i, j in pair_idx:
        if _hamiltonian_rep_first(vals[i], vals[j], rtol):
            lams.append(vals[i])
            ordered.append((i, j))
        else:
            lams.append(vals[j])
            ordered.append((j, i))
    lams = np.array(lams)
    ordered = np.array(ordered, dtype=int)
    order = np.lexsort((-lams.real, -lams.imag))
    lams = lams[order]
    ordered = ordered[order]
    n = mat.shape[0]
    X = np.zeros((n, n), dtype=complex)
    for k, (i, j) in enumerate(ordered):
        vp, vm = vecs[:, i], vecs[:, j]
        X[:, 2 * k] = (vp + vm) / np.sqrt(2.0)
        X[:, 2 * k + 1] = 1j * (vp - vm) / np.sqrt(2.0)
    defect = float(np.abs(X.T @ X - np.eye(n)).max())
    if defect > orth_tol:
        raise DegeneracyRepairFailed(f"X^T X deviates from identity by {defect:.3e}")
    return AntisymmetricDecomposition(
        lams=lams, raw=vals, pair_indices=ordered, vectors=vecs, X=X
    )


# ---------------------------------------------------------------------------
# Finite-size scaling of the mid-gap splitting
# ---------------------------------------------------------------------------


@dataclass
class SplittingScan:
    sizes: np.ndarray
    min_im: np.ndarray
    fit: FitResult | None

    def to_dict(self) -> dict:
        return {
            "sizes": self.sizes.tolist(),
            "min_im": self.min_im.tolist(),
            "fit": self.fit.to_dict() if self.fit else None,
        }


def finite_size_splitting(params: ModelParams, sizes: Sequence[int]) -> SplittingScan:
    """Minimal |Im eps| of the mid-gap pair for each chain length."""
    sizes = np.asarray(sorted(sizes), dtype=int)
    values = []
    for L in sizes:
        spec = quasi_energies(build_floquet_matrix(params.with_size(int(L))))
        values.append(abs(spec.mid_gap_pair().imag))
    values = np.array(values)
    fit = None
    if np.all(values > 0):
        fit = log_linear_fit(sizes, values)
    return SplittingScan(sizes=sizes, min_im=values, fit=fit)
