"""Command-line pipeline: quantile CSV in, pooled results and forest plots out.

Input CSV (header required)::

    measure,region,model,q5,q25,q50,q75,q95
    R,region10,model1,0.63,0.68,0.74,0.81,0.87

Optional signals CSV for reliability scores, one value per row, deaths in
chronological order::

    region,series,value
    region10,deaths,4
    region10,cases,120

``series`` is ``deaths`` (daily deaths) or ``cases`` (one sub-area count).
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import re
import sys
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import report
from .exceptions import GammaFitFailure, InputError, MetapoolError, ValidationError
from .meta import IntervalMethod, PoolResult, Weighting, combine_region
from .optim import GammaFitConfig
from .prep import PrepConfig, fit_summary
from .reliability import RegionSignal, ReliabilityConfig, reliability_score
from .types import Dataset, FitPath, FittedSummary, OutcomeMeasure, QuantileSet, validate_quantiles

logger = logging.getLogger("metapool")

INPUT_COLUMNS = ("measure", "region", "model", "q5", "q25", "q50", "q75", "q95")
SIGNAL_COLUMNS = ("region", "series", "value")
_MEASURE_ORDER = {m: i for i, m in enumerate(OutcomeMeasure)}

EXIT_OK = 0
EXIT_SKIPPED_STRICT = 1
EXIT_INPUT = 2
EXIT_GAMMA = 3


@dataclass(frozen=True)
class RunConfig:
    input_path: Path
    out_dir: Path = Path("metapool-out")
    alpha: float = 0.10
    weighting: Weighting = Weighting.Equal
    methods: tuple[IntervalMethod, ...] = (IntervalMethod.Wald, IntervalMethod.KNHA)
    seed: int = 0
    skew_threshold: float = 0.5
    knha_truncate: bool = False
    signals_path: Path | None = None
    strict: bool = False
    jobs: int = 1
    gamma_fit: GammaFitConfig = field(default_factory=GammaFitConfig)


def _read_csv(path, required):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise InputError([f"{path}: empty file, expected header {','.join(required)}"])
        header = [h.strip() for h in reader.fieldnames]
        missing = [c for c in required if c not in header]
        if missing:
            raise InputError([f"{path}: line 1: missing column(s): {', '.join(missing)}"])
        reader.fieldnames = header
        # DictReader line_num counts physical lines; header is line 1
        return [(reader.line_num, row) for row in reader]


def parse_input_csv(path) -> Dataset:
    """Read a quantile CSV into a :class:`Dataset`, collecting all row errors."""
    errors, records, seen = [], [], {}
    for line, row in _read_csv(path, INPUT_COLUMNS):
        try:
            measure = OutcomeMeasure.from_tag((row["measure"] or "").strip())
            region = (row["region"] or "").strip()
            model = (row["model"] or "").strip()
            if not region or not model:
                raise ValidationError("region and model must be non-empty")
            q = validate_quantiles(
                [(row[c] or "").strip() for c in INPUT_COLUMNS[3:]], measure, model, region
            )
        except ValidationError as exc:
            errors.append(f"{path}: line {line}: {exc}")
            continue
        if q.key in seen:
            errors.append(
                f"{path}: line {line}: duplicate key ({measure.tag}, {region}, {model}), "
                f"first seen on line {seen[q.key]}"
            )
            continue
        seen[q.key] = line
        records.append(q)
    if errors:
        raise InputError(errors)
    return Dataset.from_records(records)


def parse_signals_csv(path) -> dict[str, RegionSignal]:
    deaths, cases, errors = {}, {}, []
    for line, row in _read_csv(path, SIGNAL_COLUMNS):
        region = (row["region"] or "").strip()
        series = (row["series"] or "").strip()
        try:
            value = float(row["value"])
        except (TypeError, ValueError):
            errors.append(f"{path}: line {line}: value {row['value']!r} is not a number")
            continue
        if series == "deaths":
            deaths.setdefault(region, []).append(value)
        elif series == "cases":
            cases.setdefault(region, []).append(value)
        else:
            errors.append(f"{path}: line {line}: series must be 'deaths' or 'cases', got {series!r}")
    signals = {}
    for region in sorted(set(deaths) | set(cases)):
        try:
            signals[region] = RegionSignal(
                region, tuple(deaths.get(region, ())), tuple(cases.get(region, ()))
            )
        except (MetapoolError, ValueError) as exc:
            errors.append(f"{path}: region {region}: {exc}")
    if errors:
        raise InputError(errors)
    return signals


def record_seed(seed: int, q: QuantileSet) -> int:
    """Per-record swarm seed derived from the run seed and the record key."""
    key = f"{q.measure.tag}|{q.region_id}|{q.model_id}".encode()
    return int(np.random.SeedSequence([seed, zlib.crc32(key)]).generate_state(1)[0])


@dataclass
class GroupOutcome:
    measure: OutcomeMeasure
    region: str
    summaries: list[FittedSummary]
    results: list[PoolResult]
    gamma_failures: list[str]
    skipped: bool


def process_group(cfg: RunConfig, records: Sequence[QuantileSet], signal: RegionSignal | None) -> GroupOutcome:
    measure, region = records[0].measure, records[0].region_id
    summaries, failures = [], []
    for q in records:
        prep = PrepConfig(
            alpha=cfg.alpha,
            skew_threshold=cfg.skew_threshold,
            gamma_fit=replace(cfg.gamma_fit, seed=record_seed(cfg.seed, q)),
        )
        try:
            summaries.append(fit_summary(q, prep))
        except GammaFitFailure as exc:
            failures.append(str(exc))
            logger.warning("%s; falling back to the normal approximation", exc)
            summaries.append(fit_summary(q, prep, force_path=FitPath.Normal))

    if len(summaries) < 2:
        return GroupOutcome(measure, region, summaries, [], failures, skipped=True)

    reliability = None
    if signal is not None and measure is OutcomeMeasure.ReproductionNumber:
        reliability = reliability_score(signal, ReliabilityConfig())
    results = []
    for method in cfg.methods:
        res = combine_region(summaries, cfg.weighting, method, cfg.alpha, cfg.knha_truncate)
        results.append(replace(res, reliability=reliability))
    return GroupOutcome(measure, region, summaries, results, failures, skipped=False)


def _natural(name: str):
    # model2 before model10
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", name)]


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name)


def _format_table(outcomes: Sequence[GroupOutcome]) -> str:
    rows = []
    for o in outcomes:
        if o.skipped:
            rows.append((o.measure.tag, o.region, "-", str(len(o.summaries)), "skipped (k < 2)", "", ""))
            continue
        for r in o.results:
            rel = "-" if r.reliability is None else str(r.reliability)
            text = report.echo(r.theta_hat, (r.ci_low, r.ci_high), (r.cr_low, r.cr_high))
            rows.append((o.measure.tag, o.region, r.method.value, str(r.k), text, f"{r.tau2:.6g}", rel))
    header = ("measure", "region", "method", "k", "estimate (CI) [CR]", "tau2", "rel")
    widths = [max(len(row[i]) for row in [header, *rows]) for i in range(len(header))]
    right = {3, 5}
    return "\n".join(
        "  ".join(c.rjust(w) if i in right else c.ljust(w) for i, (c, w) in enumerate(zip(row, widths))).rstrip()
        for row in [header, *rows]
    )


def run(cfg: RunConfig, stdout=None) -> int:
    """Execute the full pipeline; returns the process exit status."""
    stdout = stdout or sys.stdout
    try:
        ds = parse_input_csv(cfg.input_path)
        signals = parse_signals_csv(cfg.signals_path) if cfg.signals_path else {}
    except InputError as exc:
        for msg in exc.diagnostics:
            print(msg, file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    groups = sorted(ds.groups(), key=lambda g: (_MEASURE_ORDER[g[0]], g[1]))
    all_models = {}
    for rec in ds:
        all_models.setdefault(rec.measure, set()).add(rec.model_id)

    tasks = []
    for measure, region in groups:
        recs = [r for r in ds if r.measure is measure and r.region_id == region]
        absent = sorted(all_models[measure] - {r.model_id for r in recs}, key=_natural)
        if absent:
            logger.info(
                "%s %s: no estimates from %s; pooling k=%d models",
                measure.tag, region, ", ".join(absent), len(recs),
            )
        tasks.append((recs, signals.get(region)))

    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = [pool.submit(process_group, cfg, recs, sig) for recs, sig in tasks]
            outcomes = [f.result() for f in futures]
    else:
        outcomes = [process_group(cfg, recs, sig) for recs, sig in tasks]

    out = Path(cfg.out_dir)
    (out / "forest").mkdir(parents=True, exist_ok=True)
    results = [r for o in outcomes for r in o.results]
    json_text, csv_text = report.serialize_results(results)
    (out / "results.json").write_text(json_text, encoding="utf-8")
    (out / "results.csv").write_text(csv_text, encoding="utf-8")
    (out / "summaries.csv").write_text(
        report.summaries_to_csv(s for o in outcomes for s in o.summaries), encoding="utf-8"
    )
    for o in outcomes:
        if o.skipped:
            logger.warning("%s %s: only %d model(s); group skipped", o.measure.tag, o.region, len(o.summaries))
            continue
        rows = report.build_forest(o.summaries, o.results, cfg.alpha)
        title = f"{o.measure.tag} - {o.region}"
        svg = report.render_svg(rows, title, measure=o.measure)
        (out / "forest" / f"{o.measure.slug}__{_safe(o.region)}.svg").write_text(svg, encoding="utf-8")

    print(_format_table(outcomes), file=stdout)

    if cfg.strict and any(o.gamma_failures for o in outcomes):
        return EXIT_GAMMA
    if cfg.strict and any(o.skipped for o in outcomes):
        return EXIT_SKIPPED_STRICT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="metapool",
        description="Pool per-model percentile estimates with an equally weighted random-effects model.",
    )
    p.add_argument("input", type=Path, help="quantile CSV (measure,region,model,q5,q25,q50,q75,q95)")
    p.add_argument("--out", type=Path, default=Path("metapool-out"), help="output directory")
    p.add_argument("--alpha", type=float, default=0.10, help="1 - interval level (default 0.10)")
    p.add_argument("--weights", choices=[w.value for w in Weighting], default="equal")
    p.add_argument("--ci", choices=["wald", "knha", "both"], default="both")
    p.add_argument("--seed", type=int, default=None, help="PSO seed (overrides $METAPOOL_SEED)")
    p.add_argument("--skew-threshold", type=float, default=0.5)
    p.add_argument("--knha-truncate", action="store_true", help="floor the KNHA scale factor at 1")
    p.add_argument("--signals", type=Path, default=None, help="region signals CSV for reliability scores")
    p.add_argument("--strict", action="store_true", help="fail on gamma-fit failures and skipped groups")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    seed = args.seed
    if seed is None:
        env = os.environ.get("METAPOOL_SEED")
        try:
            seed = int(env) if env else 0
        except ValueError:
            print(f"error: METAPOOL_SEED={env!r} is not an integer", file=sys.stderr)
            return EXIT_INPUT
    if not 0 < args.alpha < 1 or not args.skew_threshold > 0 or args.jobs < 1:
        print("error: need 0 < alpha < 1, skew-threshold > 0, jobs >= 1", file=sys.stderr)
        return EXIT_INPUT
    methods = {
        "wald": (IntervalMethod.Wald,),
        "knha": (IntervalMethod.KNHA,),
        "both": (IntervalMethod.Wald, IntervalMethod.KNHA),
    }[args.ci]
    cfg = RunConfig(
        input_path=args.input,
        out_dir=args.out,
        alpha=args.alpha,
        weighting=Weighting(args.weights),
        methods=methods,
        seed=seed,
        skew_threshold=args.skew_threshold,
        knha_truncate=args.knha_truncate,
        signals_path=args.signals,
        strict=args.strict,
        jobs=args.jobs,
    )
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
