"""Time the numba and numpy tableau kernels on the same workloads.

Each backend runs in its own interpreter because the choice is fixed at
import time (``QRECEC_NUMBA``). Usage::

    python benchmarks/bench_backends.py [--episodes 200] [--shots 2000]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from qrecec.stabilizer.kernels import BACKEND
from qrecec.stabilizer.sampling import sample_shots
from qrecec.validation import random_circuit
from qrecec.protocol import run_episode
from qrecec.network import Topology
from qrecec.noise import HardwareProfile

episodes, shots = int(sys.argv[1]), int(sys.argv[2])
rng = np.random.default_rng(0)
circ = random_circuit(rng, 8, 60)
topo = Topology.chain(2, 20.0)
prof = HardwareProfile()

# warm-up (includes JIT compilation or cache load)
t = time.perf_counter()
sample_shots(circ, 8, 10)
run_episode(topo, prof, seed=0)
warm = time.perf_counter() - t

t = time.perf_counter()
sample_shots(circ, 8, shots)
t_shots = time.perf_counter() - t

t = time.perf_counter()
fids = [run_episode(topo, prof, seed=s).fidelity for s in range(episodes)]
t_eps = time.perf_counter() - t
print(json.dumps({"backend": BACKEND, "warmup_s": warm, "shots_s": t_shots,
                  "episodes_s": t_eps, "mean_fidelity": float(np.mean(fids))}))
"""


def run(flag: str, episodes: int, shots: int) -> dict:
    env = dict(os.environ, QRECEC_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", WORKER, str(episodes), str(shots)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--episodes", type=int, default=200)
    ap.add_argument("--shots", type=int, default=2000)
    args = ap.parse_args()
    res = [run(f, args.episodes, args.shots) for f in ("1", "0")]
    print(f"{'backend':8s} {'warm-up s':>10s} {'shots s':>9s} {'episodes s':>11s} {'ms/episode':>11s}")
    for r in res:
        print(f"{r['backend']:8s} {r['warmup_s']:10.2f} {r['shots_s']:9.3f} {r['episodes_s']:11.2f} "
              f"{1e3 * r['episodes_s'] / args.episodes:11.2f}")
    nb, npy = res
    if nb["mean_fidelity"] != npy["mean_fidelity"]:
        print("warning: backends disagree on mean fidelity", file=sys.stderr)
    print(f"speedup  shots x{npy['shots_s'] / nb['shots_s']:.1f}  "
          f"episodes x{npy['episodes_s'] / nb['episodes_s']:.1f}")


if __name__ == "__main__":
    main()
