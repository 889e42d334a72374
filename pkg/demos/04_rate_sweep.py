# # How fast does the error shrink?
#
# The benchmark runner sweeps matrix sizes, replicates each size with
# independent seeds, and fits the slope of log MSE against log n. This
# is a short version of the full sweep run by the acceptance tests; the
# same thing is available as ``awnn bench`` followed by ``awnn slope``.

from awnn import BenchSpec, run_bench

spec = BenchSpec(n_values=(48, 96, 192), lambdas=(1.0,), snrs=(1.0,), p_values=(0.65,),
                 replicates=3, methods=("awnn", "o-awnn", "usvt"))
result = run_bench(spec)

for row in result.aggregates:
    print(f"{row['method']:>6} n={row['n']:<4} mean MSE {row['mean_mse']:.5f}")

# Steeper (more negative) is better.

for row in result.slopes:
    print(f"{row['method']:>6} slope {row['slope']:.3f}")
