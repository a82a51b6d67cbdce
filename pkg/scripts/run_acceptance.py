"""
Run a suite configuration, save its report and plot the residuals.

Will save:
1) the JSON-lines report
2) a CSV summary with one row per case
3) a bar plot of (lhs - rhs) / se per case
"""

import argparse
import os
import sys

import matplotlib.pyplot as plt

import kone.api as api
import kone.plot as kplot

if __name__ == "__main__":

    parser = argparse.ArgumentParser()
    parser.add_argument(
        "config_file",
        type=str,
        nargs="?",
        default="config/acceptance.ini",
        help="Path to the suite configuration",
    )
    parser.add_argument(
        "--op_dir",
        type=str,
        default="reports/",
        help="Output directory for the report and plots",
    )
    parser.add_argument(
        "--file_type",
        type=str,
        default="png",
        help="Type of image to save png or pdf",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Override the seed of the configuration",
    )
    args = vars(parser.parse_args())

    config = api.load_config(args["config_file"])
    if args["seed"] is not None:
        config["seed"] = args["seed"]

    os.makedirs(args["op_dir"], exist_ok=True)
    name = os.path.splitext(os.path.basename(args["config_file"]))[0]
    report_path = os.path.join(args["op_dir"], name + ".jsonl")

    print("running", ", ".join(config["checks"]) or "no checks")
    status, reports = api.run_suite(config, output=report_path)

    summary = api.summarise(reports)
    summary.to_csv(os.path.join(args["op_dir"], name + ".csv"), index=False)
    if len(summary):
        columns = ["check", "lhs", "rhs", "se", "pass"]
        print(summary[[c for c in columns if c in summary.columns]])

    ax = kplot.report_residuals(reports, figsize=(10, 4))
    ax.set_title(f"{name}, seed {config['seed']}")
    plt.tight_layout()
    plt.savefig(os.path.join(args["op_dir"], name + "." + args["file_type"]))
    plt.close()

    print("report saved to", report_path)
    sys.exit(status)
