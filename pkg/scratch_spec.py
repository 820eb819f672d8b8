"""Debug steady-state pair selection and overlap cross-check."""
import numpy as np

from floqferm.model import ModelParams
from floqferm.spectrum import build_floquet_matrix, quasi_energies
from floqferm import gaussian as g
from floqferm import oracle as o

p6 = ModelParams(L=6, beta=2.0, j_xx=0.2, h_y=np.pi / 3)
occ = [1, 0, 1, 1, 0, 0]  # parity -1
gs = g.initial_fock_state(occ)
ds = o.y_product_state(occ)
upd = g.step_matrix(build_floquet_matrix(p6))
for t in range(30):
    gs = g.step(gs, update=upd)
    ds = o.apply_floquet(ds, p6)

spec = quasi_energies(build_floquet_matrix(p6))
# at L=6 the near-i0 pair is split well beyond 1e-8; choose occupation by hand
ss_plus = g.steady_state(spec, i0_fill=True, i0_tol=0.1)
ss_minus = g.steady_state(spec, i0_fill=False, i0_tol=0.1)
print("parities:", g.observables(ss_plus).parity, g.observables(ss_minus).parity)

mb = o.spectral_decompose(p6)
top = mb.top_indices(2)
vec_even = mb.vectors[:, top[0]] / np.linalg.norm(mb.vectors[:, top[0]])
vec_odd = mb.vectors[:, top[1]] / np.linalg.norm(mb.vectors[:, top[1]])
print("dense parities:", mb.parity[top])

for name, ss in (("fill", ss_plus), ("nofill", ss_minus)):
    ov_g = g.overlap_magnitude(gs, ss)
    print(name, "gauss overlap:", ov_g)
ov_d_even = abs(np.vdot(vec_even, ds.amplitudes))
ov_d_odd = abs(np.vdot(vec_odd, ds.amplitudes))
print("dense overlaps:", ov_d_even, ov_d_odd)

# which Gaussian ss matches which dense eigenvector? compare C matrices
for name, ss in (("fill", ss_plus), ("nofill", ss_minus)):
    for pname, vec in (("even", vec_even), ("odd", vec_odd)):
        cm = o.measure(o.DenseState(vec, 6)).majorana_corr
        err = np.abs(ss.majorana_c_matrix() - cm).max()
        print(f"  {name} vs dense {pname}: C err {err:.2e}")
