"""Pair correlations blowing up when q has a large square factor.

For q = u v^2 every multiple of uv is a d-th power residue 0 (d >= 2), so
those n all sit at the same point and contribute M(M-1)...(M-m+1)/N
to R, where M = floor(N/(uv)).
"""

from fractions import Fraction

from ndspacing.analysis import DivergenceConfig, divergence_lower_bound, floor_power, ladder_divergence_bounds
from ndspacing.diophantine import build_ladder

# small case: q = 44 = 11 * 2^2, multiples of 22 square to 0 mod 44
res = divergence_lower_bound(DivergenceConfig(u=11, v=2, d=2, m=2, N=50))
print("q=44     R =", res.R, " bound =", res.bound, " M =", res.M)

# q = 11 * 101^2 with N past q: cubes of multiples of 1111 vanish mod q
q = 11 * 101**2
N = floor_power(q, Fraction(11, 10))
res = divergence_lower_bound(DivergenceConfig(11, 101, 3, 2, N))
print(f"q={q} N={N}  R = {float(res.R):.4f}  bound = {float(res.bound):.4f}  M = {res.M}")
print(f"   R / vol = {float(res.R) / 2:.3f}")

# a square-rich ladder: every q_j carries a square factor v_j >= q_j^delta,
# and once m > 1 + 2/delta the bound itself grows along the ladder
ladder = build_ladder(2, 1, [3, 4, 5], mode="square_rich", square_parts={0: (3, 11)})
for m in (4, 6):
    print(f"m={m}")
    for lb in ladder_divergence_bounds(ladder, m):
        print(f"   j={lb.j} q={lb.q} u={lb.u} v={lb.v} delta={lb.delta:.3f} N={lb.N} bound={float(lb.bound):.4g}"
              f"  (vol {2 ** (m - 1)})")

lb = ladder_divergence_bounds(ladder, 4, compute_R=True)[0]
print(f"j={lb.j} m=4 counted R = {float(lb.R):.1f} >= bound {float(lb.bound):.1f}")
