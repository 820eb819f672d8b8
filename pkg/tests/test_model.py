import numpy as np
import pytest

from floqferm import gaussian, oracle
from floqferm.errors import ConfigError
from floqferm.model import (
    DisorderSpec,
    ModelParams,
    a_index,
    b_index,
    build_h_xx,
    build_h_y,
    build_h_zz,
    canonical_ordering,
    matrix_from_terms,
)


def test_coefficient_rule_single_term():
    m = matrix_from_terms(1, [(1.0, 0, 1)])
    want = np.zeros((2, 2), dtype=complex)
    want[0, 1] = 2j
    want[1, 0] = -2j
    assert np.array_equal(m.entries, want)


def test_index_helpers_match_description():
    desc = canonical_ordering()
    assert "b_1, a_1" in desc["vector"]
    assert b_index(1) == 0 and a_index(1) == 1
    assert b_index(3) == 4 and a_index(3) == 5


def test_y_sign_convention_occupied_site():
    # Fock-occupied site has <Y> = +1 in both engines (Y = 2n - 1)
    dense = oracle.measure(oracle.y_product_state([1]))
    assert dense.y[0] == pytest.approx(1.0)
    state = gaussian.initial_fock_state([1])
    assert gaussian.observables(state).y[0] == pytest.approx(1.0)


def test_h_zz_single_bond_L2():
    m = build_h_zz(ModelParams(L=2))
    # -i b_1 a_2 with the coefficient rule: entries -2i at (b_1, a_2)
    assert m.entries[b_index(1), a_index(2)] == -2j
    assert m.entries[a_index(2), b_index(1)] == 2j
    assert np.count_nonzero(m.entries) == 2


def test_h_xx_single_bond_L2():
    m = build_h_xx(ModelParams(L=2))
    assert m.entries[a_index(1), b_index(2)] == 2j
    assert np.count_nonzero(m.entries) == 2


def test_h_zz_pattern_L3_open():
    m = build_h_zz(ModelParams(L=3))
    nz = {tuple(ix) for ix in np.argwhere(m.entries)}
    assert nz == {
        (b_index(1), a_index(2)),
        (a_index(2), b_index(1)),
        (b_index(2), a_index(3)),
        (a_index(3), b_index(2)),
    }


def test_wrap_bond_signs():
    per = build_h_zz(ModelParams(L=4, bc="periodic"))
    anti = build_h_zz(ModelParams(L=4, bc="antiperiodic"))
    assert per.entries[b_index(4), a_index(1)] == -2j
    assert anti.entries[b_index(4), a_index(1)] == 2j


def _plane_wave_block(matrix, L, k, order):
    p = np.zeros((2 * L, 2), dtype=complex)
    j = np.arange(1, L + 1)
    for col, idx_fn in enumerate(order):
        p[[idx_fn(s) for s in j], col] = np.exp(1j * k * j) / np.sqrt(L)
    return p.conj().T @ matrix.entries @ p


def test_momentum_space_zz_equals_xx_reversed():
    # H_ZZ(k) = H_XX(-k) block by block over the momentum grid
    L = 8
    params = ModelParams(L=L, bc="periodic")
    hzz = build_h_zz(params)
    hxx = build_h_xx(params)
    for n in range(L):
        k = 2 * np.pi * n / L
        bzz = _plane_wave_block(hzz, L, k, (a_index, b_index))
        bxx = _plane_wave_block(hxx, L, -k, (a_index, b_index))
        assert np.abs(bzz - bxx).max() < 1e-12


def test_builders_antisymmetric_all_bcs():
    for L in range(2, 9):
        for bc in ("open", "periodic", "antiperiodic"):
            params = ModelParams(L=L, bc=bc)
            for m in (build_h_zz(params), build_h_xx(params), build_h_y(params)[0]):
                assert m.antisymmetry_defect() < 1e-12


def test_bonds_disjoint_and_square_block_diagonal():
    params = ModelParams(L=6, bc="periodic")
    for m in (build_h_zz(params), build_h_xx(params), build_h_y(params)[0]):
        assert m.pairs_disjoint()
        sq = m.entries @ m.entries
        off = sq - np.diag(np.diag(sq))
        assert np.abs(off).max() < 1e-12
        for mu, nu in m.pairs:
            assert sq[mu, mu] == pytest.approx(sq[nu, nu])


def test_arbitrary_term_list_antisymmetric(rng):
    terms = [(rng.normal(), 2 * i, 2 * i + 1) for i in range(4)]
    terms += [(rng.normal() + 1j * rng.normal(), 1, 6)]
    m = matrix_from_terms(4, terms)
    assert m.antisymmetry_defect() < 1e-12


def test_uniform_field_sequence():
    _, fields = build_h_y(ModelParams(L=5, h_y=0.7), step=3)
    assert np.all(fields == 0.7)


def test_quenched_disorder_step_independent():
    dis = DisorderSpec(kind="quenched", mean=1.0, delta=0.5, seed=9)
    params = ModelParams(L=6, h_y=1.0, disorder=dis)
    _, f0 = build_h_y(params, step=0)
    _, f7 = build_h_y(params, step=7)
    assert np.array_equal(f0, f7)


def test_quenched_equal_seeds_bit_identical():
    a = DisorderSpec(kind="quenched", mean=0.3, delta=0.2, seed=42).fields(8)
    b = DisorderSpec(kind="quenched", mean=0.3, delta=0.2, seed=42).fields(8)
    assert np.array_equal(a, b)


def test_stochastic_disorder_reproducible_and_bounded():
    dis = DisorderSpec(kind="stochastic", mean=1.2, delta=0.4, seed=3)
    f_a = dis.fields(50, step=11)
    f_b = DisorderSpec(kind="stochastic", mean=1.2, delta=0.4, seed=3).fields(50, step=11)
    assert np.array_equal(f_a, f_b)
    assert np.all(f_a >= 1.2 - 0.4) and np.all(f_a <= 1.2 + 0.4)
    assert not np.array_equal(f_a, dis.fields(50, step=12))


def test_json_round_trip_and_broadcast():
    params = ModelParams.from_dict(
        {"L": 4, "beta": 1.5, "j_xx": 0.2, "h_y": [0.1, 0.2, 0.3, 0.4], "bc": "open"}
    )
    assert params.j_xx == (0.2, 0.2, 0.2)
    back = ModelParams.from_json(params.to_json())
    assert back == params


def test_validation_errors():
    with pytest.raises(ConfigError):
        ModelParams(L=1)
    with pytest.raises(ConfigError):
        ModelParams(L=4, bc="moebius")
    with pytest.raises(ConfigError):
        ModelParams(L=4, beta=-0.1)
    with pytest.raises(ConfigError):
        ModelParams(L=4, j_xx=[0.1, 0.2])  # needs 3 bonds
    with pytest.raises(ConfigError):
        ModelParams(L=4, bc="periodic", j_zz=[0.1, 0.2, 0.3])  # needs 4
    with pytest.raises(ConfigError):
        DisorderSpec(kind="sometimes")


def test_with_size_broadcasts_uniform_couplings():
    params = ModelParams(L=4, beta=2.0, j_xx=0.2, h_y=0.9, bc="periodic")
    bigger = params.with_size(10)
    assert bigger.L == 10 and bigger.j_xx == (0.2,) * 10
    with pytest.raises(ConfigError):
        ModelParams(L=3, h_y=[0.1, 0.2, 0.3]).with_size(5)
