"""Boundary data spaces: the discrete stand-in for trace spaces.

BD(G) is the graph-orthogonal complement of the interior subspace: its
dimension always equals the number of boundary dofs, and it carries the
Dirichlet data of weak solutions without any boundary function evaluation.
Some continuum identities survive exactly (orthogonal decomposition, the
interior part of the kernel identity, the boundary pairing on interior
vectors); others (the full kernel identity, unitarity of the boundary
gradient) hold only asymptotically, with order >= 1 in the mesh width.
"""

import numpy as np

from dtnlab import bd_space, build_interval_pair, d_dot, g_dot, phi_pairing
from dtnlab.linalg import to_dense

print(__doc__)

p = build_interval_pair(8)
bdg = bd_space(p, "G")
bdd = bd_space(p, "D")
print(f"dim BD(G) = {bdg.dim}, dim BD(D) = {bdd.dim} (boundary dofs: {p.b0}, {p.b1})")

print("\nExact identities at n = 8:")
e0 = p.interior_basis0()
orth = np.max(np.abs(to_dense(e0.conj().T @ (bdg.graph_gram @ bdg.basis))))
print(f"  BD(G) graph-orthogonal to interior:        {orth:.2e}")
u = bdg.basis[:, 0]
r = u - p.D @ (p.G @ u)
print(f"  interior entries of (I - DG)u:             {np.max(np.abs(r[p.interior0])):.2e}")
q = np.sin(np.linspace(0, 2, p.h1.dim))
u_int = e0 @ np.ones(len(p.interior0))
print(f"  boundary pairing on an interior vector:    {abs(phi_pairing(p, q, u_int)):.2e}")

print("\nAsymptotic identities under refinement:")
print(f"{'n':>5} {'strict-kernel':>14} {'unitarity':>11} {'grad-image':>11}")
for n in (16, 32, 64, 128, 256):
    pn = build_interval_pair(n)
    bg = bd_space(pn, "G")
    strict = max(
        pn.h0.norm(bg.basis[:, k] - pn.D @ (pn.G @ bg.basis[:, k]))
        / pn.h0.norm(bg.basis[:, k])
        for k in range(bg.dim)
    )
    comp = np.column_stack(
        [bg.coords(d_dot(pn, g_dot(pn, bg.basis[:, k]))) for k in range(bg.dim)]
    )
    unit = np.linalg.norm(comp - np.eye(bg.dim), 2)
    img = max(
        g_dot(pn, bg.basis[:, k], return_defect=True)[1] for k in range(bg.dim)
    )
    print(f"{n:>5} {strict:>14.3e} {unit:>11.3e} {img:>11.3e}")
print("(each column decays with order >= 1 in h = 1/(n+1))")
