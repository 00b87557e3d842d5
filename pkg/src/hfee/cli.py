"""Command-line entry point: ``hfee {synth,ingest-check,features,crossval,report}``."""

from __future__ import annotations

import argparse
import logging
import shutil
import sys
from pathlib import Path

from . import __version__
from .errors import HfeeError, MissingReports
from .evaluate import CvConfig, Subset, read_reports, run_loocv, summary_table, write_report
from .features import build_feature_table, write_feature_table
from .ingest import parse_recording, validate_rates
from .plot import write_boxplot
from .regress import Scenario
from .subjects import read_profiles
from .synth import DEFAULT_SEED, CohortSpec, write_cohort

log = logging.getLogger("hfee")

DEFAULTS = {
    "data_root": "data",
    "out": "out",
    "seed": DEFAULT_SEED,
    "subjects": 15,
    "scenario": "all",
    "subset": "both",
    "emit_svg": False,
    "force": False,
    "jobs": 1,
}
SVG_NAME = "boxplot.svg"


class UsageError(Exception):
    pass


def read_config_file(path) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment; dashes or underscores in keys."""
    out = {}
    for i, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":"
        if sep not in line:
            raise UsageError(f"{path}:{i}: expected key = value")
        key, value = (s.strip() for s in line.split(sep, 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{i}: unknown key {key!r}")
        out[key] = value
    return out


def _coerce(key, value):
    if key in ("seed", "subjects", "jobs"):
        return int(value)
    if key in ("emit_svg", "force") and isinstance(value, str):
        if value.lower() in ("1", "true", "yes", "on"):
            return True
        if value.lower() in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"{key}: expected a boolean, got {value!r}")
    return value


def resolve(args) -> argparse.Namespace:
    """Merge flags over the config file over built-in defaults."""
    merged = dict(DEFAULTS)
    if args.config:
        merged.update(read_config_file(args.config))
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            merged[key] = v
    cfg = argparse.Namespace(**{k: _coerce(k, v) for k, v in merged.items()})
    cfg.command = args.command
    cfg.data_root = Path(cfg.data_root)
    cfg.out = Path(cfg.out)
    return cfg


def scenarios_for(name: str) -> list[Scenario]:
    if name == "all":
        return list(Scenario)
    return [Scenario.from_cli(name)]


def subsets_for(name: str) -> list[Subset]:
    if name == "both":
        return list(Subset)
    return [Subset.from_cli(name)]


def subject_dirs(data_root: Path) -> list[Path]:
    d = data_root / "subjects"
    if not d.is_dir():
        raise HfeeError(f"no subjects/ directory under {data_root}")
    dirs = sorted(p for p in d.iterdir() if p.is_dir())
    if not dirs:
        raise HfeeError(f"{d} contains no subject directories")
    return dirs


def load_tables(data_root: Path):
    return [build_feature_table(parse_recording(d)) for d in subject_dirs(data_root)]


# ---------------------------------------------------------------- commands


def cmd_synth(cfg) -> int:
    if cfg.subjects < 3:
        raise UsageError("--subjects must be at least 3 for leave-one-subject-out")
    root = cfg.data_root
    existing = [root / "subjects", root / "ground_truth"]
    if any(p.exists() for p in existing):
        if not cfg.force:
            raise UsageError(f"{root} already holds a cohort; pass --force to replace it")
        for p in existing:
            shutil.rmtree(p, ignore_errors=True)
    spec = CohortSpec(n_subjects=cfg.subjects, seed=cfg.seed)
    write_cohort(spec, root)
    print(f"wrote {cfg.subjects} subjects to {root} (seed {cfg.seed})")
    return 0


def cmd_ingest_check(cfg) -> int:
    status = 0
    for d in subject_dirs(cfg.data_root):
        try:
            rec = parse_recording(d)
        except HfeeError as exc:
            print(f"{d.name}: ERROR {exc}")
            status = 1
            continue
        summary = validate_rates(rec)
        parts = [
            f"{s.name} {s.n_samples} samples, mean dt {s.mean_interval:.4f} s, {s.gap_count} gaps"
            for s in summary.streams
        ]
        flag = "ok" if summary.ok else f"FLAGGED {','.join(summary.flagged)}"
        print(f"{d.name}: {flag}; {'; '.join(parts)}; {len(rec.rr)} beats, {len(rec.breaths)} breaths")
    return status


def cmd_features(cfg) -> int:
    for table in load_tables(cfg.data_root):
        path = write_feature_table(table, cfg.out / "features" / f"{table.subject_id}.csv")
        print(f"{table.subject_id}: {len(table)} rows, {table.dropped_bins} bins dropped -> {path}")
    return 0


def cmd_crossval(cfg) -> int:
    tables = load_tables(cfg.data_root)
    profiles = read_profiles(cfg.data_root / "subjects.csv")
    reports = []
    for subset in subsets_for(cfg.subset):
        for scenario in scenarios_for(cfg.scenario):
            rep = run_loocv(tables, profiles, CvConfig(scenario, subset), n_jobs=cfg.jobs)
            path = write_report(rep, cfg.out)
            reports.append(rep)
            print(f"wrote {path}")
    print(summary_table(reports))
    if cfg.emit_svg:
        print(f"wrote {write_boxplot(reports, cfg.out / SVG_NAME)}")
    return 0


def cmd_report(cfg) -> int:
    reports = read_reports(cfg.out) if cfg.out.is_dir() else []
    if not reports:
        raise MissingReports(f"no report_*.json files in {cfg.out}")
    print(summary_table(reports))
    if cfg.emit_svg:
        print(f"wrote {write_boxplot(reports, cfg.out / SVG_NAME)}")
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "ingest-check": cmd_ingest_check,
    "features": cmd_features,
    "crossval": cmd_crossval,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override it")
    common.add_argument("--data-root", dest="data_root", help="cohort directory (default: data)")
    common.add_argument("--out", help="output directory for features and reports (default: out)")
    common.add_argument("--seed", type=int, help=f"cohort seed for synth (default: {DEFAULT_SEED})")
    common.add_argument("--subjects", type=int, help="number of synthetic subjects (default: 15)")
    common.add_argument("--scenario", choices=["hr", "hrhf", "hf", "all"])
    common.add_argument("--subset", choices=["all", "low", "both"])
    common.add_argument("--emit-svg", dest="emit_svg", action="store_const", const=True)
    common.add_argument("--force", action="store_const", const=True,
                        help="synth: replace an existing cohort")
    common.add_argument("--jobs", type=int, help="parallel cross-validation folds")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="hfee", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = resolve(args)
        return COMMANDS[cfg.command](cfg)
    except (HfeeError, UsageError, ValueError, OSError) as exc:
        print(f"hfee {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
