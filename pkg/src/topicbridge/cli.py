"""Command-line entry point: ``topicbridge run | compare | synth``.

Configuration precedence is flag > ``--config`` JSON file > built-in
default. Relative ``corpus_path`` values in a config file are resolved
against the file's directory; ``output_dir`` is relative to the working
directory.
"""

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import load_corpus, parse_fields
from .errors import TopicBridgeError, ParameterError
from .factorization import SolverOptions
from .joint import JointParams
from .runner import MethodKind, compare_methods
from .synth import generate_corpus
from .textpipe import (ENGLISH_STOPWORDS, Source, build_vocabulary, interleave_schedule,
                       month_start)

log = logging.getLogger("topicbridge")

METRICS_HEADER = ("time_index", "method", "cscore", "dscore", "re", "wall_clock_s")
_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
               "info": logging.INFO, "debug": logging.DEBUG}


@dataclass
class RunConfig:
    corpus_path: str = None
    start_month: str = None
    end_month: str = None
    k_c: int = 2
    k_d: int = 3
    alpha: float = 1000.0
    beta: float = 0.1
    max_iters: int = 100
    tol: float = 1e-5
    seed: int = 42
    min_df: int = 2
    max_df_ratio: float = 0.95
    per_month_cap: int = None
    methods: list = field(default_factory=lambda: [MethodKind.JOINT.value])
    output_dir: str = "topicbridge_out"
    top_terms_count: int = 5
    offline_fields: list = field(default_factory=lambda: ["title"])
    stopwords: str = "english"
    # Wall-clock times differ between runs; off by default so outputs are byte-reproducible.
    record_wall_clock: bool = False

    def validate(self):
        if not self.corpus_path:
            raise ParameterError("corpus_path is required (--corpus or config file)")
        for name in ("k_c", "k_d", "max_iters", "min_df", "top_terms_count"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ParameterError(f"{name} must be an integer >= 1, got {v!r}")
        if self.per_month_cap is not None and (not isinstance(self.per_month_cap, int) or self.per_month_cap < 1):
            raise ParameterError(f"per_month_cap must be a positive integer, got {self.per_month_cap!r}")
        if not self.alpha >= 0 or not self.beta >= 0:
            raise ParameterError(f"alpha and beta must be >= 0, got {self.alpha}, {self.beta}")
        if not self.tol >= 0:
            raise ParameterError(f"tol must be >= 0, got {self.tol}")
        if not 0 < self.max_df_ratio <= 1:
            raise ParameterError(f"max_df_ratio must be in (0, 1], got {self.max_df_ratio}")
        if self.stopwords not in ("english", "none"):
            raise ParameterError(f"stopwords must be 'english' or 'none', got {self.stopwords!r}")
        self.methods = [MethodKind.parse(m).value for m in self.methods]
        if not self.methods:
            raise ParameterError("at least one method is required")
        self.offline_fields = list(parse_fields(self.offline_fields))
        for name in ("start_month", "end_month"):
            v = getattr(self, name)
            if v is not None:
                setattr(self, name, f"{month_start(str(v)):%Y-%m}")
        return self

    def joint_params(self):
        return JointParams(k_c=self.k_c, k_d=self.k_d, alpha=float(self.alpha), beta=float(self.beta),
                           solver=SolverOptions(max_iters=self.max_iters, tol=float(self.tol),
                                                seed=self.seed))

    def to_json(self):
        return dataclasses.asdict(self)


def load_config_file(path):
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParameterError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ParameterError(f"config {path} must hold a JSON object")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ParameterError(f"unknown config keys in {path}: {', '.join(unknown)}")
    if data.get("corpus_path") and not Path(data["corpus_path"]).is_absolute():
        data["corpus_path"] = str(path.parent / data["corpus_path"])
    return data


def resolve_config(file_values, flag_values):
    """Merge defaults, config-file values and explicitly given flags (in that order)."""
    merged = dict(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    return RunConfig(**merged).validate()


def build_schedule(cfg):
    docs = load_corpus(cfg.corpus_path, cfg.offline_fields)
    if not docs:
        raise ParameterError(f"corpus {cfg.corpus_path} is empty")
    start = month_start(cfg.start_month) if cfg.start_month else min(month_start(d.timestamp) for d in docs)
    end = month_start(cfg.end_month) if cfg.end_month else max(month_start(d.timestamp) for d in docs)
    if start > end:
        raise ParameterError(f"start month {start:%Y-%m} is after end month {end:%Y-%m}")
    in_range = [d for d in docs if start <= month_start(d.timestamp) <= end]
    if len(in_range) < len(docs):
        log.info("dropped %d documents outside %s..%s", len(docs) - len(in_range), f"{start:%Y-%m}", f"{end:%Y-%m}")
    if not in_range:
        raise ParameterError("no documents fall inside the requested month range")
    stop = ENGLISH_STOPWORDS if cfg.stopwords == "english" else ()
    vocab = build_vocabulary(in_range, cfg.min_df, cfg.max_df_ratio, stop)
    if len(vocab) == 0:
        raise ParameterError("vocabulary is empty after min_df/max_df filtering")
    online = [d for d in in_range if d.source is Source.ONLINE]
    offline = [d for d in in_range if d.source is Source.OFFLINE]
    schedule = interleave_schedule(online, offline, start, end, cfg.per_month_cap, cfg.seed)
    return schedule, vocab


def _fmt(x):
    return repr(float(x))


def emit_outputs(results, cfg, output_dir, summary=False):
    """Write metrics.csv, topics.json and config.json (and summary.csv if asked).

    ``results`` is a list of TimeSeriesResult. Metric rows are ordered by
    time index, then by method in run order.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    order = {r.method.value: i for i, r in enumerate(results)}
    rows = sorted((rec for r in results for rec in r.records),
                  key=lambda rec: (rec.time_index, order[rec.method]))

    with open(out / "metrics.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRICS_HEADER)
        for rec in rows:
            wall = rec.wall_clock if cfg.record_wall_clock else 0.0
            w.writerow([rec.time_index, rec.method, _fmt(rec.cscore), _fmt(rec.dscore),
                        _fmt(rec.re), _fmt(wall)])

    topics = {"methods": {
        r.method.value: {"steps": [rep.to_json() for rep in r.reports], "warnings": r.warnings}
        for r in results
    }}
    _write_json(out / "topics.json", topics)
    _write_json(out / "config.json", cfg.to_json())

    if summary:
        with open(out / "summary.csv", "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("method", "mean_cscore", "mean_dscore", "mean_re", "mean_wall_clock_s"))
            for r in results:
                m = r.means()
                wall = m["wall_clock"] if cfg.record_wall_clock else 0.0
                w.writerow([r.method.value, _fmt(m["cscore"]), _fmt(m["dscore"]), _fmt(m["re"]), _fmt(wall)])


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=True)
        fh.write("\n")


def execute(cfg, summary=False):
    schedule, vocab = build_schedule(cfg)
    log.info("%d steps over %d months, vocabulary of %d terms", len(schedule), len(schedule.months), len(vocab))
    comparison = compare_methods(schedule, cfg.methods, cfg.joint_params(), vocab, cfg.top_terms_count)
    results = list(comparison.results.values())
    emit_outputs(results, cfg, cfg.output_dir, summary=summary)
    for r in results:
        m = r.means()
        log.info("%s: mean cscore %.6g, dscore %.6g, re %.6g, wall %.3fs",
                 r.method.value, m["cscore"], m["dscore"], m["re"], m["wall_clock"])
    return comparison


def _add_run_flags(p):
    p.add_argument("--config", help="JSON file with RunConfig fields")
    p.add_argument("--corpus", dest="corpus_path", help="JSON-lines corpus file")
    p.add_argument("--start-month", help="first month, YYYY-MM (default: earliest in corpus)")
    p.add_argument("--end-month", help="last month, YYYY-MM (default: latest in corpus)")
    p.add_argument("--k-c", type=int, help="number of common topics (default 2)")
    p.add_argument("--k-d", type=int, help="number of distinct topics (default 3)")
    p.add_argument("--alpha", type=float, help="commonness weight (default 1000)")
    p.add_argument("--beta", type=float, help="distinctiveness weight (default 0.1)")
    p.add_argument("--max-iters", type=int, help="solver iterations per step (default 100)")
    p.add_argument("--tol", type=float, help="relative objective change to stop at (default 1e-5)")
    p.add_argument("--seed", type=int, help="random seed (default 42)")
    p.add_argument("--min-df", type=int, help="minimum document frequency (default 2)")
    p.add_argument("--max-df-ratio", type=float, help="maximum document frequency ratio (default 0.95)")
    p.add_argument("--per-month-cap", type=int, help="sample at most this many documents per source per month")
    p.add_argument("--methods", type=lambda s: [x for x in s.split(",") if x],
                   help="comma-separated subset of JointONMF,ONMF,SNMF")
    p.add_argument("--output-dir", help="directory for metrics.csv, topics.json, config.json")
    p.add_argument("--top-terms", dest="top_terms_count", type=int, help="terms listed per topic (default 5)")
    p.add_argument("--offline-fields", type=lambda s: s.split(","),
                   help="offline article fields to use, e.g. title or title,summary,body (default title)")
    p.add_argument("--stopwords", choices=("english", "none"))
    p.add_argument("--timing", dest="record_wall_clock", action="store_const", const=True,
                   help="write measured wall-clock seconds (outputs are then not byte-reproducible)")


def make_parser():
    parser = argparse.ArgumentParser(prog="topicbridge",
                                     description="Common and distinct topics across two interleaved document streams.")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_flags(sub.add_parser("run", help="run the pipeline (default method JointONMF)"))
    _add_run_flags(sub.add_parser("compare", help="run several methods side by side (default all three)"))

    s = sub.add_parser("synth", help="write a seeded synthetic planted-topic corpus")
    s.add_argument("--months", type=int, default=6)
    s.add_argument("--docs-per-month", type=int, default=200, help="documents per source per month")
    s.add_argument("--vocab-size", type=int, default=500)
    s.add_argument("--start-month", default="2020-01")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="synthetic_corpus.jsonl")
    return parser


_RUN_FLAG_KEYS = [f.name for f in dataclasses.fields(RunConfig)]


def _setup_logging():
    level = _LOG_LEVELS.get(os.environ.get("TOPICBRIDGE_LOG", "warn").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _synth(args):
    if args.months < 1 or args.docs_per_month < 1 or args.vocab_size < 50:
        raise ParameterError("synth needs months >= 1, docs-per-month >= 1 and vocab-size >= 50")
    corpus = generate_corpus(months=args.months, docs_per_month=args.docs_per_month,
                             vocab_size=args.vocab_size, start=month_start(args.start_month),
                             seed=args.seed)
    corpus.write_jsonl(args.out)
    log.info("wrote %d records to %s", len(corpus.records), args.out)


def main(argv=None):
    _setup_logging()
    try:
        args = make_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else 2
    try:
        if args.command == "synth":
            _synth(args)
            return 0
        file_values = load_config_file(args.config) if args.config else {}
        flags = {k: getattr(args, k, None) for k in _RUN_FLAG_KEYS}
        if args.command == "compare" and flags["methods"] is None and "methods" not in file_values:
            flags["methods"] = [m.value for m in MethodKind]
        cfg = resolve_config(file_values, flags)
        execute(cfg, summary=args.command == "compare")
    except (TopicBridgeError, OSError) as exc:
        print(f"topicbridge: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
