"""Dense 2^L state-vector engine for the full spin chain.

Ground truth for every free-fermion code path, including YY interactions
and stochastic fields that the Gaussian engine cannot represent.  States
live in the Z-product basis with site 1 as the most significant bit and
spin-up as bit 0.  One drive period applies, right to left: per-site Y
rotations, XX bond gates, YY bond gates (when present), the ZZ phase, the
positive diagonal measurement factor exp(beta * sum ZZ), then an explicit
normalization.

Majorana operators are realized through the string convention

    b_j = (prod_{l<j} Y_l) X_j,     a_j = (prod_{l<j} Y_l) Z_j,

which reproduces Y_j = i b_j a_j, Z_j Z_{j+1} = -i b_j a_{j+1} and
X_j X_{j+1} = i a_j b_{j+1}, so measured Majorana correlation matrices are
directly comparable with the quadratic machinery (same canonical index
order b_1, a_1, ..., b_L, a_L).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SizeExceeded
from .model import ModelParams

MAX_SITES = 14
MAX_SPECTRUM_SITES = 8

_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


@dataclass
class DenseState:
    """Normalized amplitude vector over the 2^L Z-product basis."""

    amplitudes: np.ndarray
    L: int

    def copy(self) -> "DenseState":
        return DenseState(self.amplitudes.copy(), self.L)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _check_size(L: int, limit: int = MAX_SITES) -> None:
    if L > limit:
        raise SizeExceeded(f"L = {L} exceeds the dense-engine limit {limit}")


def z_product_state(bits) -> DenseState:
    """Product state along z; bit 0 = up, site 1 = most significant bit."""
    bits = [int(b) for b in bits]
    L = len(bits)
    _check_size(L)
    index = 0
    for b in bits:
        index = (index << 1) | (b & 1)
    amp = np.zeros(2**L, dtype=complex)
    amp[index] = 1.0
    return DenseState(amp, L)


def y_product_state(occupations) -> DenseState:
    """Product of Y eigenstates; occupied site -> Y = +1, empty -> Y = -1."""
    occ = [bool(o) for o in occupations]
    L = len(occ)
    _check_size(L)
    amp = np.array([1.0], dtype=complex)
    for o in occ:
        site = np.array([1.0, 1.0j if o else -1.0j], dtype=complex) / np.sqrt(2.0)
        amp = np.kron(amp, site)
    return DenseState(amp, L)


def random_z_bits(L: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).integers(0, 2, size=L)


def _apply_one_site(amp: np.ndarray, L: int, site: int, gate: np.ndarray) -> np.ndarray:
    """Apply a 2x2 gate at 1-based ``site``; trailing axes are batch."""
    rest = amp.shape[1:]
    t = amp.reshape([2] * L + list(rest))
    t = np.moveaxis(t, site - 1, 0)
    shape = t.shape
    t = gate @ t.reshape(2, -1)
    t = np.moveaxis(t.reshape(shape), 0, site - 1)
    return t.reshape(amp.shape)


def _apply_two_site(
    amp: np.ndarray, L: int, si: int, sj: int, gate: np.ndarray
) -> np.ndarray:
    """Apply a 4x4 gate at 1-based sites (si, sj); works for the wrap bond."""
    rest = amp.shape[1:]
    t = amp.reshape([2] * L + list(rest))
    t = np.moveaxis(t, (si - 1, sj - 1), (0, 1))
    shape = t.shape
    t = gate @ t.reshape(4, -1)
    t = np.moveaxis(t.reshape(shape), (0, 1), (si - 1, sj - 1))
    return t.reshape(amp.shape)


def _z_values(L: int) -> np.ndarray:
    """(L, 2^L) array of +-1 eigenvalues of Z_j per basis state."""
    idx = np.arange(2**L)
    return np.array([1.0 - 2.0 * ((idx >> (L - j)) & 1) for j in range(1, L + 1)])


def _bonds(params: ModelParams):
    """(site_i, site_j, wrap_sign) triples; sign -1 only on an antiperiodic wrap."""
    out = [(j, j + 1, 1.0) for j in range(1, params.L)]
    if params.bc != "open":
        out.append((params.L, 1, 1.0 if params.bc == "periodic" else -1.0))
    return out


def _two_site_rotation(pauli_pair: np.ndarray, angle: float) -> np.ndarray:
    return np.cos(angle) * np.eye(4) - 1j * np.sin(angle) * pauli_pair


_XX = np.kron(_PAULI_X, _PAULI_X)
_YY = np.kron(_PAULI_Y, _PAULI_Y)


def apply_factors(state: DenseState, params: ModelParams, step: int = 0) -> DenseState:
    """One unnormalized application of the drive period."""
    L = params.L
    _check_size(L)
    amp = state.amplitudes
    fields = params.h_fields(step)
    for j in range(1, L + 1):
        h = fields[j - 1]
        gate = np.array(
            [[np.cos(h), -np.sin(h)], [np.sin(h), np.cos(h)]], dtype=complex
        )
        amp = _apply_one_site(amp, L, j, gate)
    bonds = _bonds(params)
    for (si, sj, sign), j in zip(bonds, params.j_xx):
        if j != 0.0:
            amp = _apply_two_site(amp, L, si, sj, _two_site_rotation(_XX, sign * j))
    for (si, sj, sign), j in zip(bonds, params.j_yy):
        if j != 0.0:
            amp = _apply_two_site(amp, L, si, sj, _two_site_rotation(_YY, sign * j))
    zvals = _z_values(L)
    diag = np.zeros(2**L)
    for (si, sj, sign), jzz in zip(bonds, params.j_zz):
        diag = diag + (sign * jzz) * zvals[si - 1] * zvals[sj - 1]
    if np.any(diag != 0.0):
        amp = amp * np.exp(-1j * diag)[(...,) + (None,) * (amp.ndim - 1)]
    diag = np.zeros(2**L)
    for si, sj, sign in bonds:
        diag = diag + sign * zvals[si - 1] * zvals[sj - 1]
    amp = amp * np.exp(params.beta * diag)[(...,) + (None,) * (amp.ndim - 1)]
    return DenseState(amp, L)


def apply_floquet(state: DenseState, params: ModelParams, step: int = 0) -> DenseState:
    """One normalized stroboscopic step."""
    out = apply_factors(state, params, step)
    n = out.norm()
    if n == 0.0:
        raise ConfigError("state annihilated by the drive (zero norm)")
    out.amplitudes /= n
    return out


def run_trajectory(params: ModelParams, state: DenseState, n_steps: int):
    """Iterate apply_floquet; yields (step_index, state) after each step."""
    for t in range(1, n_steps + 1):
        state = apply_floquet(state, params, step=t - 1)
        yield t, state


# ---------------------------------------------------------------------------
# Measurements
# ---------------------------------------------------------------------------


def _majorana_vectors(state: DenseState) -> np.ndarray:
    """(2L, 2^L) array with row mu = gamma_mu |psi>, canonical order."""
    L = state.L
    out = np.zeros((2 * L, 2**L), dtype=complex)
    string = state.amplitudes.copy()
    for j in range(1, L + 1):
        # string currently holds (prod_{l<j} Y_l)|psi>
        out[2 * j - 2] = _apply_one_site(string, L, j, _PAULI_X)
        out[2 * j - 1] = _apply_one_site(string, L, j, _PAULI_Z)
        string = _apply_one_site(string, L, j, _PAULI_Y)
    return out


@dataclass
class DenseMeasurement:
    z: np.ndarray
    y: np.ndarray
    zz: np.ndarray
    parity: float
    majorana_corr: np.ndarray

    def mean_z(self) -> float:
        return float(self.z.mean())

    def mean_y(self) -> float:
        return float(self.y.mean())


def measure(state: DenseState) -> DenseMeasurement:
    """Exact expectation values, including the Majorana correlation matrix."""
    L = state.L
    _check_size(L)
    amp = state.amplitudes
    weights = np.abs(amp) ** 2
    zvals = _z_values(L)
    z = zvals @ weights
    zz = (zvals * weights) @ zvals.T
    y = np.zeros(L)
    for j in range(1, L + 1):
        y[j - 1] = np.real(np.vdot(amp, _apply_one_site(amp, L, j, _PAULI_Y)))
    par = amp.copy()
    for j in range(1, L + 1):
        par = _apply_one_site(par, L, j, _PAULI_Y)
    parity = float(np.real(np.vdot(amp, par)))
    gam = _majorana_vectors(state)
    corr = np.conj(gam) @ gam.T
    return DenseMeasurement(z=z, y=y, zz=zz, parity=parity, majorana_corr=corr)


def entanglement_entropy(state: DenseState, cut: int) -> float:
    """Von Neumann entropy (nats) of the first ``cut`` sites."""
    L = state.L
    if not 1 <= cut < L:
        raise ConfigError("cut must satisfy 1 <= cut < L")
    mat = state.amplitudes.reshape(2**cut, 2 ** (L - cut))
    s = np.linalg.svd(mat, compute_uv=False)
    p = np.clip(s**2, 1e-300, None)
    p = p[p > 1e-30]
    return float(-np.sum(p * np.log(p)))


def overlap(state1: DenseState, state2: DenseState) -> complex:
    return complex(np.vdot(state1.amplitudes, state2.amplitudes))


# ---------------------------------------------------------------------------
# Many-body spectrum
# ---------------------------------------------------------------------------


def floquet_operator_matrix(params: ModelParams) -> np.ndarray:
    """Materialize the 2^L x 2^L one-period operator (unnormalized)."""
    _check_size(params.L, MAX_SPECTRUM_SITES)
    dim = 2**params.L
    columns = apply_factors(
        DenseState(np.eye(dim, dtype=complex), params.L), params, step=0
    )
    return columns.amplitudes


@dataclass
class ManyBodySpectrum:
    values: np.ndarray
    vectors: np.ndarray
    parity: np.ndarray

    def top_indices(self, n: int = 2) -> np.ndarray:
        return np.argsort(-np.abs(self.values))[:n]


def spectral_decompose(params: ModelParams) -> ManyBodySpectrum:
    """Dense eigendecomposition of the many-body period operator (L <= 8)."""
    mat = floquet_operator_matrix(params)
    vals, vecs = np.linalg.eig(mat)
    L = params.L
    par = np.zeros(len(vals))
    for n in range(vecs.shape[1]):
        v = vecs[:, n]
        pv = v.copy()
        for j in range(1, L + 1):
            pv = _apply_one_site(pv, L, j, _PAULI_Y)
        par[n] = float(np.real(np.vdot(v, pv) / np.vdot(v, v)))
    return ManyBodySpectrum(values=vals, vectors=vecs, parity=par)
