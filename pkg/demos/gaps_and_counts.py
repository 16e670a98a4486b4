"""Three gaps for n*alpha, and point counts on chain curves mod p.

Part one: for d = 1 the sorted points n*b/q (n <= N) split the circle
into at most three distinct gap lengths, for every N.

Part two: the number of points on b x_1^d - b x_2^d = a (mod p) against
p, and the normalised defect B for the curves the criterion marks as
reducible.
"""

from collections import Counter
import math

from sympy import primerange

from ndspacing.correlations import consecutive_gaps, distinct_gap_counts
from ndspacing.diophantine import ContinuedFraction, RationalSource, cf_convergents
from ndspacing.ffcurves import CurveSpec, is_irreducible_criterion, nu, weil_defect

b, q = cf_convergents(ContinuedFraction.golden(30))[-1]
counts = distinct_gap_counts(1, RationalSource(b, q), 5000)
print(f"golden convergent {b}/{q}: distinct gap counts over N <= 5000 -> {Counter(counts)}")
res = consecutive_gaps(1, RationalSource(b, q), 10)
print("N=10 gaps:", {str(g): c for g, c in res.gaps.items()})

# worst |nu - p| / sqrt(p) over all a, for each (m, d)
for m, d in ((2, 2), (2, 3), (3, 2), (3, 3)):
    worst_irr, worst_B = 0.0, 0.0
    for p in primerange(5, 102):
        if d % p == 0:
            continue
        for a in range(p ** (m - 1)):
            vec = tuple((a // p**i) % p for i in range(m - 1))
            spec = CurveSpec(m, d, p, 1, vec)
            if is_irreducible_criterion(spec):
                worst_irr = max(worst_irr, abs(nu(spec).nu - p) / math.sqrt(p))
            else:
                worst_B = max(worst_B, abs(float(weil_defect(spec))) / math.sqrt(p))
    print(f"m={m} d={d}: max |nu-p|/sqrt(p) irreducible {worst_irr:.2f}, max |B|/sqrt(p) reducible {worst_B:.2f}")
