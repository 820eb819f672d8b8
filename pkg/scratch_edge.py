"""Scratch checks for the edge-mode machinery."""
import numpy as np

from floqferm.model import ModelParams
from floqferm.spectrum import build_floquet_matrix
from floqferm import edge as e

beta, h = 2.0, np.pi / 3
print("== transfer matrix ==")
T = e.transfer_matrix(beta, h)
print("  det:", T.det())
lam = np.linalg.eigvals(T.entries)
print("  numeric eig:", lam)
print("  closed form:", T.eigenvalues())
print("  |lambda1| =", abs(e.contracting_eigenvalue(beta, h)))
print("  T = i * real symmetric? ", np.abs((T.entries / 1j).imag).max())

print("== analytic left mode, L=400, kernel defect ==")
p = ModelParams(L=400, beta=beta, h_y=h)
V = build_floquet_matrix(p)
mode = e.analytic_edge_mode(beta, h, 400, "left")
rep = e.verify_mode(V, mode)
print("  defect:", rep.defect)
print("  decay slope:", rep.decay.slope, " expect:", np.log(abs(e.contracting_eigenvalue(beta, h))), " r2:", rep.decay.r_squared)

mode_r = e.analytic_edge_mode(beta, h, 400, "right")
rep_r = e.verify_mode(V, mode_r)
print("  right defect:", rep_r.defect, " slope:", rep_r.decay.slope, " r2:", rep_r.decay.r_squared)
print("  mirror check:", np.abs(mode.pair_norms() - mode_r.pair_norms()[::-1]).max())

print("== displayed M (Jxx=0): smallest eigvec vs analytic mode ==")
p_s = ModelParams(L=40, beta=beta, h_y=h)
M = e.boundary_matrix_m(p_s)
vals, vecs = np.linalg.eig(M)
k = np.abs(vals).argmin()
print("  min |eig M|:", abs(vals[k]), " lambda1^L:", abs(e.contracting_eigenvalue(beta, h)) ** 40)
v = vecs[:, k]
am = e.analytic_edge_mode(beta, h, 40, "left")
ov = abs(np.vdot(v / np.linalg.norm(v), am.coeffs))
print("  overlap with analytic left:", ov)
# also check boundary rows content
a1, a2 = np.cos(2 * h), np.sin(2 * h)
print("  row a1:", M[0, :3], "expect", [a1 + 1, -a2, 0])

print("== kernel mode at L=200, J=0 ==")
p200 = ModelParams(L=200, beta=beta, h_y=h)
V200 = build_floquet_matrix(p200)
km = e.floquet_kernel_mode(V200, sign=-1, side="left")
am200 = e.analytic_edge_mode(beta, h, 200, "left")
print("  defect:", km.defect, " overlap:", abs(np.vdot(km.coeffs, am200.coeffs)))

print("== kernel mode with Jxx=0.2 at L=300 vs M eigvec ==")
p300 = ModelParams(L=300, beta=beta, h_y=h, j_xx=0.2)
V300 = build_floquet_matrix(p300)
km300 = e.floquet_kernel_mode(V300, sign=-1, side="left")
M300 = e.boundary_matrix_m(p300)
vals, vecs = np.linalg.eig(M300)
k = np.abs(vals).argmin()
v = vecs[:, k] / np.linalg.norm(vecs[:, k])
print("  defect:", km300.defect, " overlap with M mode:", abs(np.vdot(km300.coeffs, v)))
print("  decay slope Jxx=0.2:", km300.decay_fit().slope)

print("== trivial phase: commuting succeeds, anticommuting fails ==")
p_t = ModelParams(L=200, beta=beta, h_y=np.pi / 6)
V_t = build_floquet_matrix(p_t)
km_t = e.floquet_kernel_mode(V_t, sign=+1)
print("  commuting defect:", km_t.defect)
try:
    e.floquet_kernel_mode(V_t, sign=-1)
    print("  anticommuting unexpectedly succeeded")
except Exception as ex:
    print("  anticommuting raised:", type(ex).__name__)

print("== smallest M eigenvalue scan (f64 vs mp small case) ==")
for L in (30, 50):
    pj = ModelParams(L=L, beta=beta, h_y=h, j_xx=0.2)
    f = e.smallest_m_eigenvalue(pj, method="float")
    m = e.smallest_m_eigenvalue(pj, method="mp", dps=80)
    print(f"  L={L}: float {f:.4e}  mp {m:.4e}")
