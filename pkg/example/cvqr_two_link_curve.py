import argparse

import matplotlib.pyplot as plt
import numpy as np

from skcvr.repeater import (
    ChainConfig,
    CVQuantumRepeater,
    SweepConfig,
    optimize_chain,
    sweep_rate_vs_distance,
)

if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--links", type=int, default=2)
    parser.add_argument("--optimize", action="store_true", help="tune gain and squeezing first")
    parser.add_argument("--visualize", action="store_true", help="plot the bounds")
    args = parser.parse_args()

    chain = ChainConfig(n_links=args.links)
    if args.optimize:
        chain, result = optimize_chain(chain, 200.0)
        print(
            "tuned gain {:.3f}, chi {:.3f} in {:.1f} sec".format(
                chain.gain, chain.chi, result.elapsed_time
            )
        )

    distances = np.linspace(20.0, 300.0, 15)
    curve = sweep_rate_vs_distance(
        CVQuantumRepeater(chain), distances, SweepConfig(n_process=4, progress=True)
    )
    print(curve.to_csv())

    if args.visualize:
        d = curve.column("parameter")
        fig, ax = plt.subplots()
        ax.semilogy(d, curve.column("rate"), label="lower bound")
        ax.semilogy(d, curve.column("upper"), label="upper bound")
        ax.semilogy(d, curve.column("plob"), "k--", label="PLOB")
        ax.semilogy(d, curve.column("nlink_bound"), "k:", label="{}-link bound".format(args.links))
        ax.set_xlabel("distance [km]")
        ax.legend()
        plt.show()
