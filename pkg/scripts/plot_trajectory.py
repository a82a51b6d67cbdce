"""
Draw a Gibbs sample, run the atom diffusion from it and plot both.

Will save images with:
1) the initial sample
2) the final state
3) the recorded observables against time
"""

import argparse
import os

import matplotlib.pyplot as plt

import kone.api as api
import kone.plot as kplot

if __name__ == "__main__":

    parser = argparse.ArgumentParser()
    parser.add_argument(
        "--window", type=str, default="0..4,0..4", help="Window"
    )
    parser.add_argument(
        "--potential",
        type=str,
        default="repulsive:height=5,range=1,delta=0.25",
        help="Pair potential spec",
    )
    parser.add_argument(
        "--T", type=float, default=1.0, help="Time horizon"
    )
    parser.add_argument(
        "--dt", type=float, default=1e-3, help="Time step"
    )
    parser.add_argument("--seed", type=int, default=0, help="Seed")
    parser.add_argument(
        "--op_dir",
        type=str,
        default="plots/",
        help="Output directory for plots",
    )
    parser.add_argument(
        "--file_type",
        type=str,
        default="png",
        help="Type of image to save png or pdf",
    )
    args = vars(parser.parse_args())

    os.makedirs(args["op_dir"], exist_ok=True)
    chain = api.sample_gibbs(
        args["window"],
        args["potential"],
        params={"n_samples": 1},
        seed=args["seed"],
    )
    initial = chain.samples[0]
    trajectory = api.simulate(
        initial,
        args["potential"],
        observables="count,mass,energy",
        params={"T": args["T"], "dt": args["dt"]},
        seed=args["seed"] + 1,
    )

    for name, eta in (("initial", initial), ("final", trajectory.final)):
        kplot.measure(eta, figsize=(5, 5))
        plt.tight_layout()
        image = name + "." + args["file_type"]
        plt.savefig(os.path.join(args["op_dir"], image))
        plt.close()

    kplot.trajectory(trajectory.series, figsize=(8, 4))
    plt.tight_layout()
    plt.savefig(os.path.join(args["op_dir"], "series." + args["file_type"]))
    plt.close()
    print("reflection rate", trajectory.reflection_rate)
