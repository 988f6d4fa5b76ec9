"""Full rigorous GP certification run at n=2200 for both branches."""
import time
import numpy as np
from freudcaps import gpcap, _cache
from freudcaps.gpcap import (GPParams, newton_solve, seed_vector,
                             truncate_solution, proof_constants, build_An,
                             bound_Y, bound_Z1, bound_Z2_Z3, An_norm_bound,
                             radii, positivity_check, h1R_error)

N = 2200
NU = 148
p = GPParams.standard(4, 8)

t0 = time.time()
def log(msg):
    print(f"[{time.time()-t0:7.0f}s] {msg}", flush=True)

sols = {}
for kind in ("bump", "signed"):
    sol = newton_solve(p, N, seed_vector(p, N, kind))
    sol, nu = truncate_solution(sol)
    log(f"{kind}: newton residual={float(sol.residual_norm.hi):.2e} n_u={nu}")
    assert nu <= NU
    sols[kind] = sol

log("assembling proof constants (heavy)...")
consts = proof_constants(p, N, NU)
log(f"constants ready: C_alpha={consts.C_alpha.hi!s:.30} theta={consts.theta.hi!s:.30} "
    f"C22={consts.C22.hi!s:.30} C_P={consts.C_P.hi!s:.30}")
log(f"flux c={consts.flux.c.hi!s:.25} linf={consts.flux.linf_const.hi!s:.25} "
    f"h1R={consts.flux.h1R_const.hi!s:.25}")

for kind in ("bump", "signed"):
    sol = sols[kind]
    An = build_An(sol, consts)
    log(f"{kind}: An built")
    Y = bound_Y(sol, An, consts)
    log(f"{kind}: Y = [{float(Y.lo):.6e}, {float(Y.hi):.6e}]")
    Z11, Z12, Z21, Z22, Z1 = bound_Z1(sol, An, consts)
    log(f"{kind}: Z11={float(Z11.hi):.4e} Z12={float(Z12.hi):.4e} "
        f"Z21={float(Z21.hi):.4e} Z22={float(Z22.hi):.4e} Z1={float(Z1.hi):.6e}")
    Ann = An_norm_bound(An, consts.ctx)
    Z2, Z3 = bound_Z2_Z3(sol, Ann, consts)
    log(f"{kind}: An_norm={float(Ann.hi):.4e} Z2={float(Z2.hi):.4e} Z3={float(Z3.hi):.4e}")
    rr = radii(Y, Z1, Z2, Z3)
    log(f"{kind}: radii success={rr.success} delta_lo=[{float(rr.delta_lo.lo):.6e},"
        f"{float(rr.delta_lo.hi):.6e}] delta_hi={float(rr.delta_hi.hi):.6e}")
    h1 = h1R_error(rr.delta_lo, consts.flux)
    log(f"{kind}: h1R_error <= {float(h1.hi):.6e}")
    tpos = time.time()
    pos = positivity_check(sol, rr.delta_lo, consts.flux, p,
                           coeffs=consts.coeffs)
    log(f"{kind}: positivity={pos}  [{time.time()-tpos:.0f}s]")
    _cache.store("gpresult", (kind, N, NU), {
        "Y": Y, "Z11": Z11, "Z12": Z12, "Z21": Z21, "Z22": Z22, "Z1": Z1,
        "Z2": Z2, "Z3": Z3, "An_norm": Ann,
        "delta_lo": rr.delta_lo, "delta_hi": rr.delta_hi,
        "success": rr.success, "h1R": h1, "positivity": pos,
        "residual": sol.residual_norm})
    log(f"{kind}: result cached")

log("done")
