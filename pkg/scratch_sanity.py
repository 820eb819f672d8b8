"""Scratch convention checks (not part of the package)."""
import numpy as np
import scipy.linalg

from floqferm.model import ModelParams, build_h_xx, build_h_y, build_h_zz
from floqferm.spectrum import (
    analytic_quasi_energies,
    analytic_spectrum,
    build_floquet_matrix,
    exp_factor,
    quasi_energies,
    sorted_pair_representatives,
)
from floqferm import gaussian as g
from floqferm import oracle as o

rng = np.random.default_rng(7)

print("== 1. exp_factor vs dense expm ==")
p = ModelParams(L=5, beta=0.7, j_xx=0.3, j_zz=0.2, h_y=0.9)
for build in (build_h_zz, build_h_xx):
    m = build(p)
    w = rng.normal(size=len(m.pairs))
    sc = 0.37 - 0.21j
    dense = scipy.linalg.expm(sc * m.weighted(w))
    print("  exp_factor err:", np.abs(exp_factor(m, sc, w) - dense).max())

print("== 2. V action vs dense conjugation at L=4 ==")
p4 = ModelParams(L=4, beta=0.8, j_xx=0.3, j_zz=0.45, h_y=1.1)
V = build_floquet_matrix(p4).entries
# dense side: V_hat gamma_mu V_hat^-1 = sum_nu (V^-1)_{mu nu} gamma_nu
dim = 2**p4.L
Vhat = o.floquet_operator_matrix(p4)
Vinv = np.linalg.inv(Vhat)
gmats = []
string = np.eye(dim, dtype=complex)
for j in range(1, p4.L + 1):
    gmats.append(o._apply_one_site(string, p4.L, j, o._PAULI_X))  # b_j
    gmats.append(o._apply_one_site(string, p4.L, j, o._PAULI_Z))  # a_j
    string = o._apply_one_site(string, p4.L, j, o._PAULI_Y)
Vinv_expected = np.zeros((2 * p4.L, 2 * p4.L), dtype=complex)
for mu in range(2 * p4.L):
    T = Vhat @ gmats[mu] @ Vinv
    for nu in range(2 * p4.L):
        Vinv_expected[mu, nu] = np.trace(gmats[nu].conj().T @ T) / dim
print("  V^-1 extraction err:", np.abs(Vinv_expected - np.linalg.inv(V)).max())
print("  orthogonality defect:", np.abs(V.T @ V - np.eye(8)).max())

print("== 3. analytic vs real-space spectrum (periodic, J=0) ==")
for h in (np.pi / 6, np.pi / 3):
    for bc in ("periodic", "antiperiodic"):
        pp = ModelParams(L=24, beta=2.0, h_y=h, bc=bc)
        spec = quasi_energies(build_floquet_matrix(pp))
        got = sorted_pair_representatives(spec.pairs)
        want = sorted_pair_representatives(analytic_quasi_energies(2.0, h, 24, bc))
        print(f"  h={h:.3f} {bc}: err", np.abs(got - want).max())

print("== 4. Gaussian step vs oracle at L=6 (beta=2, h=pi/3, Jxx=0.2) ==")
p6 = ModelParams(L=6, beta=2.0, j_xx=0.2, h_y=np.pi / 3)
occ = [1, 0, 1, 1, 0, 0]
gs = g.initial_fock_state(occ)
ds = o.y_product_state(occ)
upd = g.step_matrix(build_floquet_matrix(p6))
for t in range(30):
    gs = g.step(gs, update=upd)
    ds = o.apply_floquet(ds, p6)
meas = o.measure(ds)
print("  C^m err:", np.abs(gs.majorana_c_matrix() - meas.majorana_corr).max())
obs = g.observables(gs)
print("  Y err:", np.abs(obs.y - meas.y).max())
print("  parity:", obs.parity, meas.parity)
zz_err = max(
    abs(g.string_correlator(gs, j, k) - meas.zz[j - 1, k - 1])
    for j in range(1, 6)
    for k in range(j + 1, 7)
)
print("  ZZ string err:", zz_err)
print("  entropy err:", abs(g.entanglement_entropy(gs, 3) - o.entanglement_entropy(ds, 3)))

print("== 5. steady state ==")
spec6 = quasi_energies(build_floquet_matrix(p6))
print("  midgap:", spec6.mid_gap_pair(), "bulk gap:", spec6.bulk_im_gap())
ss_a = g.steady_state(spec6, i0_fill=True)
ss_b = g.steady_state(spec6, i0_fill=False)
print("  tr C:", np.trace(ss_a.c_matrix()).real, "defects:", max(ss_a.invariant_defects().values()))
print("  parities:", g.observables(ss_a).parity, g.observables(ss_b).parity)
st, n, conv = g.evolve_to_steady(p6, g.initial_fock_state([0] * 6))
d1, d2 = g.correlation_distance(st, ss_a), g.correlation_distance(st, ss_b)
print(f"  converged={conv} after {n} steps; dists {d1:.2e} {d2:.2e}")
# dense: top eigenvector overlap with evolved
mb = o.spectral_decompose(p6)
top = mb.top_indices(2)
print("  top |eigs|:", np.abs(mb.values[top]), "parities:", mb.parity[top])
go = g.overlap_magnitude(gs, ss_a), g.overlap_magnitude(gs, ss_b)
dv1 = abs(np.vdot(mb.vectors[:, top[0]] / np.linalg.norm(mb.vectors[:, top[0]]), ds.amplitudes))
dv2 = abs(np.vdot(mb.vectors[:, top[1]] / np.linalg.norm(mb.vectors[:, top[1]]), ds.amplitudes))
print("  overlaps gauss:", go, " dense:", (dv1, dv2))

print("== 6. ODE sign resolution at L=4 ==")
p_ode = ModelParams(L=4, beta=0.8, h_y=0.0)
hzz = build_h_zz(p_ode)
start = g.initial_fock_state([1, 0, 0, 1])
dso = o.y_product_state([1, 0, 0, 1])
dso2 = o.apply_floquet(dso, ModelParams(L=4, beta=0.8, h_y=0.0))
ref = o.measure(dso2).majorana_corr
for sign in (+1, -1):
    out = g.evolve_ode(start, hzz.entries, 0.8, cubic_sign=sign)
    print(f"  sign {sign:+d}: err vs dense:", np.abs(out.majorana_c_matrix() - ref).max())

print("== 7. analytic spectrum spot values ==")
eps, _ = analytic_spectrum(2.0, np.pi / 3, np.pi / 2)
print("  k=pi/2 (2, pi/3):", eps, "expect Re pi/2, Im 1.6525")
