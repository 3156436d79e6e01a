import argparse

import matplotlib.pyplot as plt
import numpy as np

from skcvr.bounds import plob
from skcvr.purification import entanglement_ratio, iterative_rate, optimize_single_shot

if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--links", type=int, default=1)
    parser.add_argument("--iterative", action="store_true", help="compare with (k, m) = (2, 3)")
    parser.add_argument("--visualize", action="store_true", help="plot the ratio to the bound")
    args = parser.parse_args()

    etas = np.logspace(-4, np.log10(0.999), 40)
    ratios = []
    for eta in etas:
        best = optimize_single_shot(float(eta), n_links=args.links)
        ratios.append(best.ratio)
        print("eta {:.3e}: (k, m) = ({}, {}), ratio {:.4f}".format(eta, best.k, best.m, best.ratio))

    iterative = []
    if args.iterative:
        for eta in etas:
            rate = iterative_rate(2, 3, float(eta)).rate
            iterative.append(rate / float(plob(eta)))
        gamma = entanglement_ratio(3, 0.5)
        print("entanglement ratio over 3 rails at chi=0.5: {:.4f}".format(gamma))

    if args.visualize:
        fig, ax = plt.subplots()
        ax.semilogx(etas, ratios, label="optimal single shot")
        if iterative:
            ax.semilogx(etas, iterative, label="iterative (2, 3)")
        ax.set_xlabel("transmissivity")
        ax.set_ylabel("rate / PLOB")
        ax.legend()
        plt.show()
