"""Approximant ladders and the square-free-part classification.

Builds three ladders converging to different alphas and reads off
log(squarefree part of q_j) / log(q_j) along each one.  The verdict only
looks at these ratios; the correlation traces are attached as evidence.
"""

from ndspacing.analysis import classify_alpha, schedule_Nj
from ndspacing.diophantine import build_ladder, diophantine_ratio

ladders = {
    "prime": build_ladder(3, 1, [3, 4], mode="prime_denominator"),
    "raw": build_ladder(3, 1, [3, 4]),
    "square-rich": build_ladder(2, 1, [3, 4, 5], mode="square_rich", square_parts={0: (3, 11)}),
}

for name, lad in ladders.items():
    print(name)
    print(lad.to_text())
    ratios = [round(diophantine_ratio(lad, j), 4) for j in range(len(lad))]
    print("ratios", ratios)
    for d_list in ([2], [2, 3, 4]):
        v = classify_alpha(lad, d_list, budget=10**12)
        print(f"   d_list={d_list}: {v.classification}")
    v = classify_alpha(lad, [2], budget=10**12)
    for t in v.traces:
        if t.value is not None:
            print(f"   trace d={t.d} j={t.j} N={t.N} R={float(t.value):.4f}")
    print()

# N_j = floor(q_j^(1 - 1/(4k))) with the order k switching at j_k
lad = build_ladder(2, 1, [3, 4, 5, 6])
for s in schedule_Nj(lad, {2: 0, 3: 2, 5: 3}):
    print(f"j={s.j} k={s.k} q={s.q} N={s.N}")
