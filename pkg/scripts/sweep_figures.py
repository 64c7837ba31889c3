"""Genuine negativity along XY evolution for the three dynamics experiments.

    python3 scripts/sweep_figures.py w3        # |001>, three qubits
    python3 scripts/sweep_figures.py chi4      # sqrt(2/3)|0001> + |1111>/sqrt(3)
    python3 scripts/sweep_figures.py singlet   # |0011>, four qubits

Writes results/<name>.csv with rows gt,E and prints the local maxima.
"""
import argparse
import pathlib
import time
from dataclasses import dataclass

import numpy as np

from xygme import dynamics, gme, states
from xygme.qstate import PureState


@dataclass
class SweepConfig:
    name: str
    start: float = 0.0
    stop: float = 3.2
    step: float = 0.01
    out_dir: str = "results"


INITIAL = {
    "w3": lambda: PureState.basis("001"),
    "chi4": lambda: states.from_kets({"0001": np.sqrt(2 / 3), "1111": 1 / np.sqrt(3)}),
    "singlet": lambda: PureState.basis("0011"),
}


def local_maxima(gts, values, floor=0.4):
    inner = (values[1:-1] >= values[:-2]) & (values[1:-1] >= values[2:]) & (values[1:-1] > floor)
    return [(gts[k + 1], values[k + 1]) for k in np.flatnonzero(inner)]


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("name", choices=sorted(INITIAL))
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--stop", type=float, default=3.2)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--out-dir", default="results")
    a = p.parse_args()
    cfg = SweepConfig(a.name, a.start, a.stop, a.step, a.out_dir)

    s0 = INITIAL[cfg.name]()
    h = dynamics.complete_graph(s0.n)
    t0 = time.perf_counter()
    records = dynamics.sweep(h, s0, dynamics.grid(cfg.start, cfg.stop, cfg.step),
                             gme=lambda s: gme.genuine_negativity(s).value)
    out = pathlib.Path(cfg.out_dir)
    out.mkdir(exist_ok=True)
    path = out / f"{cfg.name}.csv"
    path.write_text(dynamics.sweep_csv(records))
    gts = np.array([r.gt for r in records])
    vals = np.array([r.gme_value for r in records])
    print(f"{len(records)} points in {time.perf_counter() - t0:.1f}s -> {path}")
    for gt, v in local_maxima(gts, vals):
        print(f"  peak gt={gt:.2f}  E={v:.6f}")


if __name__ == "__main__":
    main()
