import argparse

import matplotlib.pyplot as plt
import numpy as np

from skcvr.bounds import crossing_distance
from skcvr.repeater import (
    DirectTransmission,
    MemorylessRepeater,
    SweepConfig,
    ThreeRepeaterChain,
    sweep_rate_vs_distance,
)

if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--three", action="store_true", help="add the three-repeater chain")
    parser.add_argument("--n-process", type=int, default=4)
    parser.add_argument("--visualize", action="store_true", help="plot the curves")
    args = parser.parse_args()

    distances = np.linspace(10.0, 400.0, 40)
    config = SweepConfig(n_process=args.n_process, progress=True)
    curves = {
        "direct": sweep_rate_vs_distance(DirectTransmission(), distances, config),
        "memoryless": sweep_rate_vs_distance(MemorylessRepeater(), distances, config),
    }
    if args.three:
        curves["three repeaters"] = sweep_rate_vs_distance(ThreeRepeaterChain(), distances, config)

    for name, curve in curves.items():
        print("{}: beats PLOB from {} km".format(name, crossing_distance(curve)))

    if args.visualize:
        fig, ax = plt.subplots()
        for name, curve in curves.items():
            ax.semilogy(curve.column("parameter"), curve.column("rate"), label=name)
        memoryless = curves["memoryless"]
        ax.semilogy(memoryless.column("parameter"), memoryless.column("plob"), "k--", label="PLOB")
        ax.set_xlabel("distance [km]")
        ax.set_ylabel("key rate [bits per use]")
        ax.legend()
        plt.show()
