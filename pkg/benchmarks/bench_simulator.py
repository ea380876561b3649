"""Time the numba and numpy simulator kernels on the same workload.

    python3 benchmarks/bench_simulator.py --rounds 2000000 --repeat 3
"""

import argparse
import time

import numpy as np

from nsqkd import _accel
from nsqkd.simulator import ProtocolConfig, _source


def _best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rounds", type=int, default=2_000_000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--n", type=int, default=3)
    args = parser.parse_args(argv)

    paths = [False] + ([True] if _accel.HAVE_NUMBA else [])
    print(f"rounds={args.rounds} N={args.n} numba_available={_accel.HAVE_NUMBA}")
    print("mode,path,sample_s,tally_s,rounds_per_s")
    for adversarial in (False, True):
        config = ProtocolConfig(N=args.n, p=0.95, rounds=args.rounds, seed=7, adversarial=adversarial)
        _, comp_cum, outcome_cum = _source(config)
        key = _accel.seed_key(config.seed)
        results = {}
        for use_numba in paths:
            def sample():
                return _accel.sample_rounds(key, 0, config.rounds, config.N, config.q, config.qprime,
                                            0.05, comp_cum, outcome_cum, adversarial, use_numba=use_numba)
            sample()  # warm-up, includes jit compilation
            t_sample, cols = _best_of(sample, args.repeat)
            x, y, a, b, _ = cols
            tally = lambda: _accel.tally(x, y, a, b, config.N + 1, config.N, use_numba=use_numba)
            tally()
            t_tally, _ = _best_of(tally, args.repeat)
            results[use_numba] = cols
            name = "numba" if use_numba else "numpy"
            mode = "adversarial" if adversarial else "honest"
            print(f"{mode},{name},{t_sample:.4f},{t_tally:.4f},{args.rounds / t_sample:.3e}")
        if len(results) == 2:
            same = all(np.array_equal(u, v) for u, v in zip(results[False], results[True]))
            print(f"{'adversarial' if adversarial else 'honest'},identical_output,{same}")


if __name__ == "__main__":
    main()
