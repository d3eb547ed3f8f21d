"""Scaling study: run both engines over a size grid, then fit the six runtime models.

    python scripts/reproduce_scaling.py --trials 500 --out results/

Writes results.csv, per-engine .dat plot files and fits.json into --out.
"""
import argparse
import json
import logging
from pathlib import Path

from lollipop_schelling.bench import (ExperimentPlan, plot_data, records_to_csv, run_experiment,
                                      series_of, summarize)
from lollipop_schelling.fitting import estimate_exponents, fit_models, report_to_dict

TRADITIONAL_SIZES = [500, 1000, 2000, 4000, 8000]
COUNT_FIRST_SIZES = [10_000, 30_000, 100_000, 300_000, 1_000_000, 3_000_000]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--master-seed", type=int, default=20240601)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--traditional-sizes", type=int, nargs="+", default=TRADITIONAL_SIZES)
    ap.add_argument("--count-first-sizes", type=int, nargs="+", default=COUNT_FIRST_SIZES)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args.out.mkdir(parents=True, exist_ok=True)

    records = []
    for engine, sizes in (("traditional", args.traditional_sizes),
                          ("count_first", args.count_first_sizes)):
        plan = ExperimentPlan(sizes=sizes, trials_per_size=args.trials, engines=(engine,),
                              master_seed=args.master_seed)
        records += run_experiment(plan, jobs=args.jobs,
                                  progress=lambda e, s, c: logging.info("%s n=%d done", e, s))
    (args.out / "results.csv").write_text(records_to_csv(records))

    fits = []
    for engine, rows in summarize(records).items():
        (args.out / f"{engine}.dat").write_text(plot_data(rows))
        series = series_of(rows)
        if len(series) < 4:
            logging.warning("%s: only %d sizes with satisfied runs; skipping fit", engine, len(series))
            continue
        fit, exps = fit_models(series), estimate_exponents(series)
        fits.append(report_to_dict(fit, exps, engine=engine))
        print(f"{engine}: best={fit.best_model} polyfit b={exps.polyfit_loglog:.3f} "
              f"nls b={exps.nonlinear_ls:.3f} local b={exps.local_exponent:.3f}")
    (args.out / "fits.json").write_text(json.dumps(fits, indent=2) + "\n")


if __name__ == "__main__":
    main()
