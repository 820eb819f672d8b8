import numpy as np
import pytest
import scipy.linalg

from conftest import assert_sorted_close, random_antisymmetric
from floqferm import oracle
from floqferm.errors import (
    AmbiguousClassification,
    NonAntisymmetricInput,
    OverlappingBonds,
)
from floqferm.model import (
    ModelParams,
    build_h_xx,
    build_h_y,
    build_h_zz,
    matrix_from_terms,
)
from floqferm.spectrum import (
    analytic_quasi_energies,
    analytic_spectrum,
    build_floquet_matrix,
    classify_phase,
    diagonalize_hamiltonian,
    exp_factor,
    finite_size_splitting,
    gap_condition,
    momentum_grid,
    quasi_energies,
    sorted_pair_representatives,
)


# ---------------------------------------------------------------------------
# exp_factor and build_floquet_matrix
# ---------------------------------------------------------------------------


def test_exp_factor_zero_scale_is_identity():
    m = build_h_zz(ModelParams(L=5))
    assert np.array_equal(exp_factor(m, 0.0), np.eye(10))


def test_exp_factor_pi_half_rotation_negates():
    # uniform h_y = pi/2 at beta = 0: every on-site block becomes -identity
    hy, fields = build_h_y(ModelParams(L=4, h_y=np.pi / 2))
    f = exp_factor(hy, -1j, fields)
    assert np.abs(f + np.eye(8)).max() < 1e-12


def test_exp_factor_against_dense_expm(rng):
    m = matrix_from_terms(2, [(0.8, 0, 3)])
    scale = 0.4 - 0.9j
    dense = scipy.linalg.expm(scale * m.entries)
    assert np.abs(exp_factor(m, scale) - dense).max() < 1e-12
    params = ModelParams(L=5, bc="periodic")
    for build in (build_h_zz, build_h_xx):
        mat = build(params)
        w = rng.normal(size=len(mat.pairs))
        dense = scipy.linalg.expm((0.3 + 0.7j) * mat.weighted(w))
        assert np.abs(exp_factor(mat, 0.3 + 0.7j, w) - dense).max() < 1e-12


def test_exp_factor_rejects_overlapping_bonds():
    m = matrix_from_terms(2, [(1.0, 0, 1), (1.0, 1, 2)])
    with pytest.raises(OverlappingBonds):
        exp_factor(m, 1.0)


def test_floquet_trivial_is_identity():
    V = build_floquet_matrix(ModelParams(L=4))
    assert np.abs(V.entries - np.eye(8)).max() < 1e-14


def test_floquet_unitary_at_zero_beta():
    p = ModelParams(L=6, j_xx=0.4, j_zz=0.7, h_y=0.9)
    V = build_floquet_matrix(p).entries
    assert np.abs(V.conj().T @ V - np.eye(12)).max() < 1e-12


def test_product_rule_fidelity(rng):
    # V assembled from block exponentials equals the ordered dense product
    for _ in range(4):
        L = int(rng.integers(3, 7))
        p = ModelParams(
            L=L,
            beta=float(rng.uniform(0, 1.5)),
            j_xx=[float(x) for x in rng.uniform(-1, 1, L - 1)],
            j_zz=[float(x) for x in rng.uniform(-1, 1, L - 1)],
            h_y=[float(x) for x in rng.uniform(-2, 2, L)],
        )
        hzz = build_h_zz(p)
        hxx = build_h_xx(p)
        hy, fields = build_h_y(p)
        dense = (
            scipy.linalg.expm(p.beta * hzz.weighted(np.ones(L - 1)))
            @ scipy.linalg.expm(-1j * hzz.weighted(p.j_zz))
            @ scipy.linalg.expm(-1j * hxx.weighted(p.j_xx))
            @ scipy.linalg.expm(-1j * hy.weighted(fields))
        )
        assert np.abs(build_floquet_matrix(p).entries - dense).max() < 1e-10


def test_floquet_matrix_structure():
    p = ModelParams(L=5, beta=0.8, j_xx=0.3, j_zz=0.2, h_y=1.1)
    V = build_floquet_matrix(p)
    assert V.orthogonality_defect() < 1e-12
    assert abs(np.linalg.det(V.entries) - 1.0) < 1e-10
    # conjugation by V keeps Hermitian Gaussian generators Hermitian
    g = random_antisymmetric(10, np.random.default_rng(0), complex_entries=False) * 1j
    conj = V.entries @ scipy.linalg.expm(-g) @ V.entries.conj().T
    assert np.abs(conj - conj.conj().T).max() < 1e-10


def test_floquet_action_matches_dense_conjugation():
    # V^{-1} read off from V_hat gamma V_hat^{-1} in the dense engine
    p = ModelParams(L=4, beta=0.8, j_xx=0.3, j_zz=0.45, h_y=1.1)
    V = build_floquet_matrix(p).entries
    dim = 2**p.L
    vhat = oracle.floquet_operator_matrix(p)
    vinv = np.linalg.inv(vhat)
    gmats = []
    string = np.eye(dim, dtype=complex)
    for j in range(1, p.L + 1):
        gmats.append(oracle._apply_one_site(string, p.L, j, oracle._PAULI_X))
        gmats.append(oracle._apply_one_site(string, p.L, j, oracle._PAULI_Z))
        string = oracle._apply_one_site(string, p.L, j, oracle._PAULI_Y)
    got = np.zeros((8, 8), dtype=complex)
    for mu in range(8):
        t = vhat @ gmats[mu] @ vinv
        for nu in range(8):
            got[mu, nu] = np.trace(gmats[nu].conj().T @ t) / dim
    assert np.abs(got - np.linalg.inv(V)).max() < 1e-10


def test_floquet_rejects_interactions():
    from floqferm.errors import ConfigError

    with pytest.raises(ConfigError):
        build_floquet_matrix(ModelParams(L=4, j_yy=0.3))


# ---------------------------------------------------------------------------
# quasi_energies
# ---------------------------------------------------------------------------


def test_quasi_identity_all_zero():
    spec = quasi_energies(np.eye(8, dtype=complex))
    assert np.abs(spec.pairs).max() < 1e-12


def test_quasi_minus_identity_flags_branch_pairs():
    spec = quasi_energies(-np.eye(8, dtype=complex))
    assert np.all(spec.pi_branch)
    assert spec.pi_half_degeneracy == 4
    assert np.abs(spec.pairs - np.pi / 2).max() < 1e-12
    assert np.abs(spec.raw + 1).max() < 1e-12


def test_quasi_midgap_modes_deep_oscillatory():
    p = ModelParams(L=200, beta=2.0, h_y=np.pi / 3)
    spec = quasi_energies(build_floquet_matrix(p))
    full = spec.full_spectrum()
    near_real = np.abs(full.imag) < 1e-6
    assert near_real.sum() == 2
    assert np.abs(np.abs(full.real[near_real]) - np.pi / 2).max() < 1e-8
    assert np.abs(full.imag[~near_real]).min() >= 1.0


def test_quasi_spectrum_consistency(rng):
    p = ModelParams(L=8, beta=0.9, j_xx=0.35, j_zz=0.15, h_y=0.7, bc="periodic")
    V = build_floquet_matrix(p)
    spec = quasi_energies(V)
    got = np.concatenate([np.exp(-2j * spec.pairs), np.exp(2j * spec.pairs)])
    want = np.linalg.eigvals(V.entries)
    assert_sorted_close(got, want, 1e-8)


def test_quasi_left_right_biorthonormal():
    p = ModelParams(L=6, beta=1.2, j_xx=0.3, h_y=0.8, bc="periodic")
    spec = quasi_energies(build_floquet_matrix(p))
    prod = spec.left() @ spec.right
    assert np.abs(prod - np.eye(12)).max() < 1e-8


# ---------------------------------------------------------------------------
# analytic spectrum
# ---------------------------------------------------------------------------


def test_analytic_trivial_point():
    for k in (0.0, 0.4, np.pi / 2):
        eps, meps = analytic_spectrum(0.0, 0.0, k)
        assert eps == pytest.approx(0.0) and meps == pytest.approx(0.0)


def test_analytic_value_at_k_pi_half():
    beta, h = 2.0, np.pi / 3
    z = np.cosh(2 * beta) * np.cos(2 * h)
    assert z == pytest.approx(-13.6540, abs=5e-4)
    eps, _ = analytic_spectrum(beta, h, np.pi / 2)
    want_im = 0.5 * np.log(abs(z) + np.sqrt(z * z - 1))
    assert abs(eps.real) == pytest.approx(np.pi / 2, abs=1e-12)
    assert abs(eps.imag) == pytest.approx(want_im, abs=1e-10)
    assert abs(eps.imag) == pytest.approx(1.6525, abs=5e-4)


def test_gap_closes_exactly_at_condition_boundary():
    beta = 2.0
    for sign in (+1, -1):
        h_star = 0.5 * np.arccos(sign / np.cosh(2 * beta))
        eps, _ = analytic_spectrum(beta, h_star, np.pi / 2)
        # square-root branch point: float accuracy is ~sqrt(eps_machine)
        assert abs(eps.imag) < 1e-7
        eps_in, _ = analytic_spectrum(beta, h_star + sign * 0.05, np.pi / 2)
        assert abs(eps_in.imag) > 1e-3


def test_real_space_matches_momentum_formula():
    for h in (np.pi / 6, np.pi / 3):
        for bc in ("periodic", "antiperiodic"):
            p = ModelParams(L=24, beta=2.0, h_y=h, bc=bc)
            spec = quasi_energies(build_floquet_matrix(p))
            got = sorted_pair_representatives(spec.pairs)
            want = sorted_pair_representatives(analytic_quasi_energies(2.0, h, 24, bc))
            assert np.abs(got - want).max() < 1e-8


def test_momentum_grid_conventions():
    k_per = momentum_grid(4, "periodic")
    assert_sorted_close(k_per, [-np.pi / 2, 0.0, np.pi / 2, np.pi], 1e-15)
    k_anti = momentum_grid(4, "antiperiodic")
    assert_sorted_close(
        k_anti, [-3 * np.pi / 4, -np.pi / 4, np.pi / 4, 3 * np.pi / 4], 1e-15
    )


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


def test_classify_analytic_examples():
    assert gap_condition(2.0, np.pi / 3) == pytest.approx(-13.654, abs=1e-3)
    assert classify_phase(2.0, np.pi / 3) == "oscillatory"
    assert classify_phase(2.0, np.pi / 6) == "trivial-degenerate"
    for h in (0.2, np.pi / 4, 1.3):
        assert classify_phase(0.0, h) == "gapless"


def test_classify_numeric_matches_analytic_examples():
    for beta, h, want in (
        (2.0, np.pi / 3, "oscillatory"),
        (2.0, np.pi / 6, "trivial-degenerate"),
        (0.2, np.pi / 4, "gapless"),
    ):
        p = ModelParams(L=64, beta=beta, h_y=h, bc="periodic")
        spec = quasi_energies(build_floquet_matrix(p))
        assert classify_phase(spectrum=spec, gap_tol=5e-3) == want


def test_classify_grid_agreement():
    # analytic inequality vs numerical gap/splitting away from the boundary
    mismatches = 0
    for beta in np.linspace(0.1, 2.5, 20):
        for h in np.linspace(0.05, 1.5, 20):
            if 0.7 < abs(gap_condition(beta, h)) < 1.4:
                continue
            p = ModelParams(L=64, beta=float(beta), h_y=float(h), bc="periodic")
            spec = quasi_energies(build_floquet_matrix(p))
            try:
                got = classify_phase(spectrum=spec, gap_tol=5e-3)
            except AmbiguousClassification:
                continue
            if got != classify_phase(float(beta), float(h)):
                mismatches += 1
    assert mismatches == 0


def test_classify_ambiguous_band_raises():
    # gap engineered into the tolerance band by choice of gap_tol
    p = ModelParams(L=64, beta=2.0, h_y=np.pi / 3, bc="periodic")
    spec = quasi_energies(build_floquet_matrix(p))
    gap = spec.bulk_im_gap()
    with pytest.raises(AmbiguousClassification):
        classify_phase(spectrum=spec, gap_tol=gap / 1.5)


# ---------------------------------------------------------------------------
# diagonalize_hamiltonian
# ---------------------------------------------------------------------------


def test_diagonalize_single_block():
    h = np.array([[0.0, 2j], [-2j, 0.0]])
    dec = diagonalize_hamiltonian(h)
    assert dec.lams[0] == pytest.approx(2.0)
    assert np.abs(dec.X.T @ dec.X - np.eye(2)).max() < 1e-12


def test_diagonalize_random_antisymmetric(rng):
    for _ in range(5):
        h = random_antisymmetric(20, rng)
        dec = diagonalize_hamiltonian(h)
        n = 20
        assert np.abs(dec.X.T @ dec.X - np.eye(n)).max() < 1e-8
        assert np.abs(dec.X @ dec.X.T - np.eye(n)).max() < 1e-8
        assert np.abs(dec.X.T @ h @ dec.X - dec.sigma()).max() < 1e-8
        # ordering rule: positive real part (or positive imaginary part)
        for lam in dec.lams:
            assert lam.real > 1e-9 or (abs(lam.real) <= 1e-9 and lam.imag >= 0)


def test_diagonalize_degenerate_blocks():
    # two identical 2x2 blocks: eigenvalues doubly degenerate
    h = np.zeros((4, 4), dtype=complex)
    h[0, 1], h[1, 0] = 2j, -2j
    h[2, 3], h[3, 2] = 2j, -2j
    dec = diagonalize_hamiltonian(h)
    assert np.abs(dec.X.T @ h @ dec.X - dec.sigma()).max() < 1e-10


def test_diagonalize_zero_matrix():
    dec = diagonalize_hamiltonian(np.zeros((6, 6), dtype=complex))
    assert np.abs(dec.lams).max() < 1e-12
    assert np.abs(dec.X.T @ dec.X - np.eye(6)).max() < 1e-10


def test_diagonalize_rejects_non_antisymmetric(rng):
    with pytest.raises(NonAntisymmetricInput):
        diagonalize_hamiltonian(rng.normal(size=(4, 4)))


def test_quasi_energies_equal_half_hamiltonian_eigenvalues():
    # eps_j = lam_j / 2 when H is the generator of V (away from branch cuts)
    p = ModelParams(L=6, beta=0.6, j_xx=0.2, h_y=0.4, bc="periodic")
    V = build_floquet_matrix(p)
    spec = quasi_energies(V)
    hf = 1j * scipy.linalg.logm(V.entries)
    dec = diagonalize_hamiltonian(0.5 * (hf - hf.T))
    assert_sorted_close(spec.pairs, dec.lams / 2.0, 1e-8)


# ---------------------------------------------------------------------------
# finite-size splitting
# ---------------------------------------------------------------------------


def test_finite_size_splitting_oscillatory_decay():
    scan = finite_size_splitting(
        ModelParams(L=16, beta=2.0, h_y=np.pi / 3), [16, 24, 32, 40]
    )
    assert scan.fit is not None
    assert scan.fit.slope < 0
    assert scan.fit.r_squared > 0.99
    # doubling L in the deep phase cuts the splitting by far more than 10x
    assert scan.min_im[0] / scan.min_im[2] > 10.0


def test_finite_size_splitting_gapless_not_exponential():
    scan = finite_size_splitting(
        ModelParams(L=16, beta=0.2, h_y=np.pi / 4), [16, 24, 32, 40]
    )
    assert scan.min_im[0] / scan.min_im[2] < 10.0
    assert scan.fit.slope > -0.05
