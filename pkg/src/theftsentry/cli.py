"""Command-line entry point: synth, tamper, detect, evaluate, experiment, mic.

All commands read one JSON config (see DEFAULT_CONFIG for the schema and
defaults) and accept a handful of overriding flags; flags win over config
values.  Every command is a pure function of its config and input files:
rerunning with the same inputs produces byte-identical outputs.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal error.
"""

from __future__ import annotations

import argparse
import csv
import glob
import json
import sys
from pathlib import Path

import numpy as np

from . import correlate
from .errors import ConfigError, DataError, MetricError, ParameterError, TheftSentryError
from .evaluate import (
    DEFAULT_MAP_N,
    ExperimentConfig,
    LabeledRanking,
    auc,
    map_at_n,
    run_experiment,
    write_curves_csv,
    write_report_csv,
    write_report_json,
)
from .fdi import MIX, TamperScenario, build_scenario
from .meterdata import (
    AreaDataset,
    ColumnSpec,
    load_consumers_csv,
    load_observer_csv,
    observer_from_truth,
    synth_ground_truth,
    write_consumers_csv,
    write_observer_csv,
)
from .pipeline import SuspicionRanking, detect

DEFAULT_CONFIG = {
    "paths": {
        "consumers": None,
        "observer": None,  # file, glob over per-area files, or "derive"
        "ground_truth": None,
        "scenario": None,
        "out_dir": "out",
    },
    "generator": {
        "n_consumers": 391,
        "m_days": 30,
        "intervals": 48,
        "seed": 1,
        "noise_sigma": 0.35,
        "observer_noise_sigma": 0.0,  # exact truth sums unless > 0
    },
    "scenario": {
        "areas": 10,
        "thieves_per_area": 5,
        "fdi_mix": MIX,
        "tampered_day_fraction": 0.5,
        "seed": 2,
    },
    "detect": {
        "methods": ["mic", "cfsfdp", "arith", "geo"],
        "kernel": "cutoff",
        "dc_fraction": 0.02,
        "mic_bound_exponent": 0.6,
        "per_area_zeta": False,
    },
    "evaluate": {
        "map_n": DEFAULT_MAP_N,
        "trials": 100,
        "master_seed": 7,
    },
}


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(path: str | None) -> dict:
    if path is None:
        return json.loads(json.dumps(DEFAULT_CONFIG))
    try:
        with open(path, encoding="utf-8") as fh:
            user = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(user, dict):
        raise ConfigError("config root must be a JSON object")
    for key in user:
        if key not in DEFAULT_CONFIG:
            raise ConfigError(f"unknown config section {key!r}")
    return _merge(DEFAULT_CONFIG, user)


def _out_dir(cfg: dict, args) -> Path:
    out = Path(args.out_dir or cfg["paths"]["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fdi_mix(value):
    if value is None or value == MIX:
        return MIX
    return value


# ---------------------------------------------------------------------------
# commands

def _observer_sigma(cfg: dict, args) -> float:
    flag = getattr(args, "observer_noise_sigma", None)
    return flag if flag is not None else cfg["generator"]["observer_noise_sigma"]


def cmd_synth(cfg: dict, args) -> int:
    g = cfg["generator"]
    seed = args.seed if args.seed is not None else g["seed"]
    consumers = synth_ground_truth(
        g["n_consumers"], g["m_days"], g["intervals"], seed, g["noise_sigma"]
    )
    out = _out_dir(cfg, args)
    write_consumers_csv(out / "consumers.csv", consumers)
    observer = observer_from_truth(consumers, _observer_sigma(cfg, args), seed=seed)
    write_observer_csv(out / "observer.csv", observer)
    print(f"wrote {out / 'consumers.csv'} ({len(consumers)} consumers x {consumers[0].m} days)")
    print(f"wrote {out / 'observer.csv'}")
    return 0


def cmd_tamper(cfg: dict, args) -> int:
    g, s = cfg["generator"], cfg["scenario"]
    consumers = synth_ground_truth(
        g["n_consumers"], g["m_days"], g["intervals"], g["seed"], g["noise_sigma"]
    )
    seed = args.seed if args.seed is not None else s["seed"]
    areas, scenario = build_scenario(
        consumers,
        s["areas"],
        s["thieves_per_area"],
        _fdi_mix(s["fdi_mix"]),
        seed=seed,
        tampered_day_fraction=s["tampered_day_fraction"],
    )
    out = _out_dir(cfg, args)
    all_consumers = [c for a in areas for c in a.consumers]
    write_consumers_csv(out / "consumers.csv", all_consumers, which="recorded")
    write_consumers_csv(out / "ground_truth.csv", all_consumers, which="truth")
    obs_sigma = _observer_sigma(cfg, args)
    for k, area in enumerate(areas):
        observer = area.observer
        if obs_sigma > 0:
            observer = observer_from_truth(
                area.consumers, obs_sigma, seed=seed * 1000 + k, which="truth"
            )
        write_observer_csv(out / f"observer_{k:02d}.csv", observer)
    scenario.to_json(out / "scenario.json")
    print(f"wrote {out / 'consumers.csv'} and {len(areas)} observer files")
    print(f"wrote {out / 'scenario.json'} ({len(scenario.fraud_set)} fraud ids)")
    return 0


def _assemble_areas(cfg: dict, args) -> list[AreaDataset]:
    paths = cfg["paths"]
    if args.consumers:
        paths = dict(paths, consumers=args.consumers)
    if args.observer:
        paths = dict(paths, observer=args.observer)
    if not paths["consumers"]:
        raise ConfigError("detect needs paths.consumers (or --consumers)")
    consumers = load_consumers_csv(paths["consumers"], ColumnSpec())
    if not consumers:
        raise DataError(f"{paths['consumers']}: no consumers found")
    by_id = {c.consumer_id: c for c in consumers}

    if paths["scenario"]:
        area_ids = TamperScenario.from_json(paths["scenario"]).areas
    else:
        area_ids = [[c.consumer_id for c in consumers]]

    observer_spec = paths["observer"]
    if not observer_spec:
        raise ConfigError("detect needs paths.observer (a file, a glob, or 'derive')")

    truth_by_id = None
    if observer_spec == "derive":
        if not paths["ground_truth"]:
            raise ConfigError("observer 'derive' needs paths.ground_truth")
        truth = load_consumers_csv(paths["ground_truth"], ColumnSpec())
        truth_by_id = {c.consumer_id: c for c in truth}
        observer_files = None
    else:
        observer_files = sorted(glob.glob(observer_spec))
        if not observer_files:
            raise ConfigError(f"no observer file matches {observer_spec!r}")
        if len(observer_files) != len(area_ids):
            raise ConfigError(
                f"{len(observer_files)} observer files for {len(area_ids)} areas"
            )

    areas = []
    for k, ids in enumerate(area_ids):
        missing = [cid for cid in ids if cid not in by_id]
        if missing:
            raise DataError(f"area {k}: consumers missing from CSV: {missing[:5]}")
        members = [by_id[cid] for cid in ids]
        if truth_by_id is not None:
            try:
                truth_members = [truth_by_id[cid] for cid in ids]
            except KeyError as exc:
                raise DataError(f"area {k}: ground truth missing consumer {exc}") from None
            observer = observer_from_truth(truth_members, which="recorded")
        else:
            observer = load_observer_csv(observer_files[k])
        areas.append(AreaDataset(members, observer))
    return areas


def cmd_detect(cfg: dict, args) -> int:
    d = cfg["detect"]
    methods = args.methods.split(",") if args.methods else d["methods"]
    areas = _assemble_areas(cfg, args)
    result = detect(
        areas,
        methods,
        kernel=args.kernel or d["kernel"],
        dc_fraction=d["dc_fraction"],
        bound_exponent=d["mic_bound_exponent"],
        per_area_zeta=d["per_area_zeta"],
    )
    out = _out_dir(cfg, args)
    result.to_csv(out / "ranking.csv")
    print(f"wrote {out / 'ranking.csv'} ({len(result.consumer_ids)} consumers, "
          f"methods: {', '.join(result.rankings)})")
    return 0


_RANK_COLUMNS = {
    "mic": "mic_rank",
    "cfsfdp": "zeta_rank",
    "pcc": "pcc_rank",
    "arith": "combined_arith",
    "geo": "combined_geo",
}


def load_ranking_csv(path) -> dict[str, SuspicionRanking]:
    """Rebuild per-method rankings from a ranking.csv."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "consumer_id" not in reader.fieldnames:
            raise DataError(f"{path}: not a ranking.csv (missing consumer_id)")
        rows = list(reader)
    ids = [r["consumer_id"] for r in rows]
    rankings = {}
    for method, col in _RANK_COLUMNS.items():
        if rows and col in rows[0]:
            ranks = np.array([float(r[col]) for r in rows])
            rankings[method] = SuspicionRanking(ids, ranks.copy(), ranks)
    if not rankings:
        raise DataError(f"{path}: no rank columns found")
    return rankings


def cmd_evaluate(cfg: dict, args) -> int:
    ranking_path = args.ranking or str(Path(cfg["paths"]["out_dir"]) / "ranking.csv")
    scenario_path = args.scenario or cfg["paths"]["scenario"]
    if not scenario_path:
        raise ConfigError("evaluate needs a scenario JSON for ground-truth labels")
    map_n = args.map_n or cfg["evaluate"]["map_n"]
    scenario = TamperScenario.from_json(scenario_path)
    rankings = load_ranking_csv(ranking_path)
    metrics = {}
    for method, ranking in rankings.items():
        labeled = LabeledRanking(ranking, scenario.fraud_set)
        metrics[method] = {
            "auc": auc(labeled),
            f"map@{map_n}": map_at_n(labeled, map_n),
        }
    out = _out_dir(cfg, args)
    with open(out / "metrics.json", "w", encoding="utf-8") as fh:
        json.dump(metrics, fh, indent=1, sort_keys=True)
    for method in sorted(metrics):
        vals = metrics[method]
        print(f"{method}: auc={vals['auc']:.4f} map@{map_n}={vals[f'map@{map_n}']:.4f}")
    print(f"wrote {out / 'metrics.json'}")
    return 0


def cmd_experiment(cfg: dict, args) -> int:
    g, s, d, e = cfg["generator"], cfg["scenario"], cfg["detect"], cfg["evaluate"]
    methods = args.methods.split(",") if args.methods else d["methods"]
    exp = ExperimentConfig(
        n_consumers=g["n_consumers"],
        m_days=g["m_days"],
        intervals=g["intervals"],
        gen_seed=g["seed"],
        noise_sigma=g["noise_sigma"],
        n_areas=s["areas"],
        thieves_per_area=s["thieves_per_area"],
        fdi_mix=_fdi_mix(s["fdi_mix"]),
        tampered_day_fraction=s["tampered_day_fraction"],
        methods=tuple(methods),
        kernel=args.kernel or d["kernel"],
        dc_fraction=d["dc_fraction"],
        bound_exponent=d["mic_bound_exponent"],
        map_n=args.map_n or e["map_n"],
        trials=args.trials or e["trials"],
        master_seed=args.seed if args.seed is not None else e["master_seed"],
        threads=args.threads,
    )
    report = run_experiment(exp)
    out = _out_dir(cfg, args)
    write_report_json(report, out / "report.json")
    write_report_csv(report, out / "report.csv")
    write_curves_csv(report, out / "curves.csv")
    for method, stats in report.methods.items():
        print(
            f"{method}: auc {stats.auc_mean:.4f} +- {stats.auc_std:.4f}  "
            f"map@{report.map_n} {stats.map_mean:.4f} +- {stats.map_std:.4f}  "
            f"({stats.runtime_s:.1f}s over {stats.trials} trials)"
        )
    print(f"wrote {out / 'report.json'}, {out / 'report.csv'}, {out / 'curves.csv'}")
    return 0


def cmd_mic(cfg: dict, args) -> int:
    xs, ys = [], []
    with open(args.input, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) < 2:
                raise DataError(f"{args.input}:{lineno}: need two columns")
            try:
                x, y = float(row[0]), float(row[1])
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise DataError(f"{args.input}:{lineno}: non-numeric pair") from None
            xs.append(x)
            ys.append(y)
    result = correlate.mic_detail(xs, ys)
    print(f"mic {result.value!r}")
    if result.degenerate:
        print("note: a coordinate is constant; no dependence measurable")
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="theftsentry",
        description="Smart-meter electricity-theft detection toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out-dir", help="output directory (overrides paths.out_dir)")
        p.add_argument("--seed", type=int, help="override the command's primary seed")

    p = sub.add_parser("synth", help="generate synthetic ground-truth CSVs")
    common(p)
    p.add_argument("--observer-noise-sigma", type=float,
                   help="zero-mean Gaussian observer noise per interval (default 0)")

    p = sub.add_parser("tamper", help="generate a labeled tamper scenario")
    common(p)
    p.add_argument("--observer-noise-sigma", type=float,
                   help="zero-mean Gaussian observer noise per interval (default 0)")

    p = sub.add_parser("detect", help="rank consumers by suspicion")
    common(p)
    p.add_argument("--consumers", help="consumer CSV (wide layout)")
    p.add_argument("--observer", help="observer CSV, glob over per-area files, or 'derive'")
    p.add_argument("--methods", help="comma list: mic,cfsfdp,pcc,arith,geo")
    p.add_argument("--kernel", choices=["cutoff", "gaussian"])

    p = sub.add_parser("evaluate", help="score a ranking against scenario labels")
    common(p)
    p.add_argument("--ranking", help="ranking.csv from detect")
    p.add_argument("--scenario", help="scenario.json with ground-truth labels")
    p.add_argument("--map-n", type=int)

    p = sub.add_parser("experiment", help="repeated-scenario evaluation harness")
    common(p)
    p.add_argument("--methods", help="comma list: mic,cfsfdp,pcc,arith,geo")
    p.add_argument("--kernel", choices=["cutoff", "gaussian"])
    p.add_argument("--trials", type=int)
    p.add_argument("--map-n", type=int)
    p.add_argument("--threads", type=int, help="worker processes (env THEFTSENTRY_THREADS)")

    p = sub.add_parser("mic", help="MIC of a two-column CSV")
    common(p)
    p.add_argument("input", help="CSV with x,y columns")

    return parser


_COMMANDS = {
    "synth": cmd_synth,
    "tamper": cmd_tamper,
    "detect": cmd_detect,
    "evaluate": cmd_evaluate,
    "experiment": cmd_experiment,
    "mic": cmd_mic,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return _COMMANDS[args.command](cfg, args)
    except (ConfigError, ParameterError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (DataError, MetricError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except TheftSentryError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # anything else is an internal invariant failure
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
