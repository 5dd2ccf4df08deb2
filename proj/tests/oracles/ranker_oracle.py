"""Straight-line synchronous iteration of the mutual-validation ranker.

Used once to freeze golden scores for the 2-code / 2-test fixture:
c1 passes t1 and t2, c2 passes t1 only.
"""
from fractions import Fraction

d = Fraction(85, 100)
M = 10
codes = ["c1", "c2"]
tests = ["t1", "t2"]
link = {("t1", "c1"): 1, ("t2", "c1"): 1, ("t1", "c2"): 1, ("t2", "c2"): 0}


def run(stochastic):
    sc = {c: Fraction(1) for c in codes}
    st = {t: Fraction(1) for t in tests}
    out_t = {t: sum(link[(t, c)] for c in codes) for t in tests}
    out_c = {c: sum(link[(t, c)] for t in tests) for c in codes}
    for _ in range(M):
        nc, nt = {}, {}
        for c in codes:
            recv = sum(st[t] * link[(t, c)] / (out_t[t] if stochastic else 1)
                       for t in tests if out_t[t] > 0)
            nc[c] = (1 - d) * sc[c] + d * recv
        for t in tests:
            recv = sum(sc[c] * link[(t, c)] / (out_c[c] if stochastic else 1)
                       for c in codes if out_c[c] > 0)
            nt[t] = (1 - d) * st[t] + d * recv
        sc, st = nc, nt
    return sc, st


for mode in (True, False):
    sc, st = run(mode)
    print("stochastic" if mode else "literal")
    for k, v in {**sc, **st}.items():
        print(f"  {k} {float(v):.17g}")
