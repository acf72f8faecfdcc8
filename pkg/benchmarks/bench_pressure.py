"""Wall-clock timings for the pressure recursions on the built-in systems.

    python benchmarks/bench_pressure.py
"""
import math
import timeit

from tifs import cantor_tifs, counterexample_tifs, solve_beta, solve_beta_star, z_level, z_star

LOG2_LOG3 = math.log(2) / math.log(3)


def best_of(fn, repeat=5):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    spec = counterexample_tifs()
    z_star(spec, 1.0, 400)  # build the level graph once
    rows = [
        ("z_star counterexample n=200", lambda: z_star(spec, LOG2_LOG3, 200)),
        ("z_star counterexample n=400", lambda: z_star(spec, LOG2_LOG3, 400)),
        ("z_level counterexample n=200", lambda: z_level(spec, 0.9, 200)),
        ("z_star cantor n=1000", lambda: z_star(cantor_tifs(), LOG2_LOG3, 1000)),
        ("solve_beta_star counterexample to n=200", lambda: solve_beta_star(spec, 1e-3, range(25, 201, 25))),
        ("solve_beta counterexample to n=200", lambda: solve_beta(spec, 1e-3, range(25, 201, 25))),
    ]
    for name, fn in rows:
        print(f"{name:45s} {best_of(fn) * 1e3:9.2f} ms")


if __name__ == "__main__":
    main()
