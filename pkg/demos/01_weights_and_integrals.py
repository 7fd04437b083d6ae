"""Weights, the antiderivative W, and what the integral classifier says about them.

    python3 demos/01_weights_and_integrals.py
"""

from vrrw import (WeightSpec, W_limit, eval_H, eval_W, estimate_critical, inv_W, partial_J,
                  partial_J_tilde, series_tests)

specs = [WeightSpec.constant(1.0), WeightSpec.linear(), WeightSpec.power(2.0),
         WeightSpec.sublog(0.3), WeightSpec.sublog(0.7)]

print("W is piecewise linear; W(3) for linear weights is 1 + 1/2 + 1/3 =", eval_W(specs[1], 3))
print("W^-1 undoes it:", inv_W(specs[1], eval_W(specs[1], 3)))
print("power(2) has a bounded W, with limit", W_limit(specs[2]))
print("H(x) = x + W^-1(W(x) + 1); for constant weights H(2) =", eval_H(specs[0], 2.0))
print()

# the hand-computed value 101/144 of the partial J integral
print("J_0 on [0, 1] for linear weights:", partial_J(specs[1], 0.0, 1.0), "vs", 101 / 144)
print("J~ always dominates J:", partial_J_tilde(specs[1], 0.0, 100.0), ">=", partial_J(specs[1], 0.0, 100.0))
print()

for spec in specs:
    s = series_tests(spec)
    bc = estimate_critical(spec, "BetaC")
    print(f"{spec.label:12s} sum 1/w {s['recip'].verdict.value:10s} sum 1/w^2 {s['recip_sq'].verdict.value:10s}"
          f" beta_c {bc.verdict} {bc.bracket or ''}")
print("\n(verdicts are numerical classifications from finite cutoffs, not proofs)")
