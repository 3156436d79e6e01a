import argparse

import matplotlib.pyplot as plt
import numpy as np

from skcvr.scissors import ScissorSpec, scissor_fidelity

if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--coherent", type=float, default=0.1, help="input amplitude")
    parser.add_argument("--visualize", action="store_true", help="plot fidelity and probability")
    args = parser.parse_args()

    gains = np.linspace(0.2, 3.0, 30)
    table = {}
    for order in (1, 2, 3):
        values = np.array([scissor_fidelity(args.coherent, ScissorSpec(order, g)) for g in gains])
        table[order] = values
        fidelity, _ = scissor_fidelity(args.coherent, ScissorSpec(order, 2.0))
        print("order {}: fidelity at g=2 {:.6f}".format(order, fidelity))

    if args.visualize:
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
        for order, values in table.items():
            ax1.plot(gains, values[:, 0], label="n={}".format(order))
            ax2.semilogy(gains, values[:, 1], label="n={}".format(order))
        ax1.set_xlabel("gain")
        ax1.set_ylabel("fidelity")
        ax2.set_xlabel("gain")
        ax2.set_ylabel("success probability")
        ax1.legend()
        plt.show()
