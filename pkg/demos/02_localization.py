"""How many sites does the walk keep visiting?

The tail support is the set of sites whose local time grew during the last 10%
of a run.  It is a finite-horizon stand-in for the set of sites visited
infinitely often.

    python3 demos/02_localization.py
"""

from vrrw import InitialConfig, WeightSpec, localization_report, new_walk, run, tail_schedule

horizons = [10**4, 10**5, 10**6]
for spec in (WeightSpec.power(2.0), WeightSpec.linear(), WeightSpec.power(0.4)):
    records = [run(new_walk(InitialConfig.C0(), spec, seed=2026, replica=r), horizons[-1],
                   tail_schedule(horizons)) for r in range(20)]
    print(spec.label)
    for row in localization_report(records, 0.1, horizons):
        print(f"  n={row.horizon:>8d}  cardinalities {row.histogram}  mode {row.mode}")

# superlinear weights stick to two sites, linear ones settle on a handful, and
# sublinear ones keep spreading as the horizon grows
