"""Command line interface.

Subcommands::

    mtscf explain    --train R --test T [--query ID] --out DIR
    mtscf benchmark  --train R --test T --out DIR [--sweep alpha|theta]
    mtscf metrics    --train R --test T --reports DIR [--out FILE]
    mtscf nun        --train R --test T [--query ID]

Exit codes: 0 success, 1 input or structural error, 2 no nearest unlike neighbor.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import warnings
from dataclasses import fields, replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .classifier import CentroidClassifier, Classifier, ExternalClassifier
from .core import LabeledDataset
from .engine import EngineConfig, explain, explain_batch, reselect
from .errors import MtscfError
from .ingest import load_dataset, load_weights
from .metrics import MetricsSummary, summarize
from .nun import find_nun
from .reports import dumps, file_sha256, manifest_id, read_report, report_to_dict, series_to_csv

log = logging.getLogger("mtscf")

ALPHA_GRID = (0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0)
THETA_GRID = (0.55, 0.65, 0.75, 0.85, 0.95)

EXIT_OK, EXIT_ERROR, EXIT_NO_NUN = 0, 1, 2

# flag dest -> EngineConfig field
_CONFIG_FLAGS = {
    "theta": "theta",
    "alpha": "alpha",
    "pop_size": "pop_size",
    "generations": "generations",
    "pc": "pc",
    "pm": "pm",
    "partitions": "partitions",
    "distance": "distance",
    "objectives": "objective_mode",
    "seed": "seed",
    "window_placement": "window_placement",
    "nun_distance": "nun_distance",
}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_ERROR):
        super().__init__(message)
        self.code = code


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--train", required=True, help="reference dataset (.ts, .json, .csv)")
    p.add_argument("--test", required=True, help="dataset holding the instances to explain")
    p.add_argument("--weights", help="CSV of per-time-step feature weights for reference instances")
    p.add_argument("--shape", help="T,D for CSV datasets")
    p.add_argument("--config", help="JSON file of option values; flags override it")
    p.add_argument("--classifier", choices=("centroid", "external"), default=None)
    p.add_argument("--external-cmd", help="command launching an external classifier process")
    p.add_argument("--temperature", type=float, default=None, help="centroid classifier temperature")
    p.add_argument("--theta", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--pop-size", type=int)
    p.add_argument("--generations", type=int)
    p.add_argument("--pc", type=float)
    p.add_argument("--pm", type=float)
    p.add_argument("--partitions", type=int)
    p.add_argument("--distance", choices=("l1", "l2", "dtw"))
    p.add_argument("--nun-distance", choices=("l1", "l2", "dtw"))
    p.add_argument("--objectives", choices=("co_pr", "co_sp", "sp_pr", "co_sp_pr"))
    p.add_argument("--window-placement", choices=("center", "start", "scan-best-of-three"))
    p.add_argument("--no-weights", action="store_true", default=None, help="skip the weight-guided naive stage")
    p.add_argument("--seed", type=int)
    p.add_argument("--ynn-mode", choices=("prose", "literal"))
    p.add_argument("--metric-scope", choices=("all", "best"))
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mtscf", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"mtscf {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explain", help="explain one instance")
    _add_common(p)
    p.add_argument("--query", help="instance id in the test set (default: first)")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("benchmark", help="explain every test instance and aggregate metrics")
    _add_common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--parallel", type=int, default=None, help="concurrent explain calls")
    p.add_argument("--sweep", choices=("alpha", "theta"))

    p = sub.add_parser("metrics", help="recompute metrics from saved reports")
    _add_common(p)
    p.add_argument("--reports", required=True, help="directory of report JSON files")
    p.add_argument("--out", help="write the metrics JSON here instead of stdout")

    p = sub.add_parser("nun", help="show the nearest unlike neighbor of an instance")
    _add_common(p)
    p.add_argument("--query", help="instance id in the test set (default: first)")
    return ap


def _settings(args: argparse.Namespace) -> dict:
    """Merge defaults, the optional config file and explicit flags (in that order)."""
    merged = {
        "classifier": "centroid",
        "temperature": 1.0,
        "ynn_mode": "prose",
        "metric_scope": None,
        "parallel": 1,
        "use_weights": True,
        "external_cmd": None,
    }
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read config {args.config}: {exc}") from None
        for key, value in doc.items():
            merged[key.replace("-", "_")] = value
    for key, value in vars(args).items():
        if value is not None and key not in ("command", "config"):
            merged[key] = value
    if merged.pop("no_weights", False):
        merged["use_weights"] = False
    return merged


def _engine_config(s: dict) -> EngineConfig:
    kwargs = {}
    for flag, fieldname in _CONFIG_FLAGS.items():
        for key in (flag, fieldname):
            if key in s:
                kwargs[fieldname] = s[key]
    kwargs["use_weights"] = bool(s.get("use_weights", True))
    known = {f.name for f in fields(EngineConfig)}
    return EngineConfig(**{k: v for k, v in kwargs.items() if k in known})


def _shape(s: dict):
    if not s.get("shape"):
        return None
    try:
        t, d = (int(v) for v in str(s["shape"]).split(","))
    except ValueError:
        raise CliError(f"--shape expects T,D, got {s['shape']!r}") from None
    return t, d


def _load(s: dict) -> tuple[LabeledDataset, LabeledDataset, dict]:
    for key in ("train", "test"):
        if not Path(s[key]).is_file():
            raise CliError(f"missing file: {s[key]}")
    shape = _shape(s)
    train, test = load_dataset(s["train"], shape), load_dataset(s["test"], shape)
    datasets = {
        "train": {"path": str(s["train"]), "sha256": file_sha256(s["train"])},
        "test": {"path": str(s["test"]), "sha256": file_sha256(s["test"])},
    }
    if s.get("weights"):
        if not Path(s["weights"]).is_file():
            raise CliError(f"missing file: {s['weights']}")
        train = train.with_weights(load_weights(s["weights"], train.t))
        datasets["weights"] = {"path": str(s["weights"]), "sha256": file_sha256(s["weights"])}
    return train, test, datasets


_OPEN: list[ExternalClassifier] = []


def _classifier(s: dict, train: LabeledDataset) -> Classifier:
    if s["classifier"] == "external":
        if not s.get("external_cmd"):
            raise CliError("--classifier external needs --external-cmd")
        clf = ExternalClassifier(s["external_cmd"], train.n_classes)
        _OPEN.append(clf)
        return clf
    return CentroidClassifier.fit(train, float(s["temperature"]))


def _manifest(s: dict, config: EngineConfig, datasets: dict) -> dict:
    """Reproducibility record; deliberately free of timestamps so reports are byte-stable."""
    return {
        "tool": "mtscf",
        "version": __version__,
        "seed": config.seed,
        "config": config.to_dict(),
        "classifier": {
            "kind": s["classifier"],
            "temperature": float(s["temperature"]) if s["classifier"] == "centroid" else None,
            "external_cmd": s.get("external_cmd"),
        },
        "metrics": {"ynn_mode": s["ynn_mode"], "scope": s.get("metric_scope") or "all"},
        "datasets": datasets,
    }


def _write_manifest(out: Path, manifest: dict) -> None:
    record = dict(manifest, id=manifest_id(manifest), created=datetime.now(timezone.utc).isoformat())
    (out / "manifest.json").write_text(dumps(record), encoding="utf-8")


def _pick_query(test: LabeledDataset, qid: str | None):
    if len(test) == 0:
        raise CliError("test set is empty")
    if qid is None:
        return test.instances[0]
    return test.get(qid)


def cmd_explain(args) -> int:
    s = _settings(args)
    train, test, datasets = _load(s)
    config = _engine_config(s)
    query = _pick_query(test, s.get("query"))
    clf = _classifier(s, train)
    report = explain(clf, query, train, config)
    out = Path(s["out"])
    out.mkdir(parents=True, exist_ok=True)
    manifest = _manifest(s, config, datasets)
    _write_manifest(out, manifest)
    (out / "report.json").write_text(dumps(report_to_dict(report, manifest)), encoding="utf-8")
    if report.status == "no_nun":
        raise CliError("no nearest unlike neighbor for this instance", EXIT_NO_NUN)
    if report.best is not None:
        (out / "best_ce.csv").write_text(series_to_csv(report.best.instance.values), encoding="utf-8")
    print(f"{report.query_id}: {len(report.ces)} counterfactuals, best index {report.best_index}")
    return EXIT_OK


def _sweep_row(setting: dict, summary: MetricsSummary) -> dict:
    return {**setting, **summary.to_dict()}


def _write_csv(path: Path, rows: list[dict]) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


def _write_reports(out: Path, reports, manifest: dict) -> None:
    rdir = out / "reports"
    rdir.mkdir(parents=True, exist_ok=True)
    for i, r in enumerate(reports):
        (rdir / f"{i:05d}.json").write_text(dumps(report_to_dict(r, manifest)), encoding="utf-8")


def cmd_benchmark(args) -> int:
    s = _settings(args)
    train, test, datasets = _load(s)
    config = _engine_config(s)
    if len(test) == 0:
        raise CliError("test set is empty: coverage is undefined")
    clf = _classifier(s, train)
    out = Path(s["out"])
    out.mkdir(parents=True, exist_ok=True)
    sweep = s.get("sweep")
    # a sweep compares selections, so it scores the chosen CE unless told otherwise
    scope = s.get("metric_scope") or ("best" if sweep == "alpha" else "all")
    s["metric_scope"] = scope
    parallel = int(s.get("parallel") or 1)
    manifest = _manifest(s, config, datasets)
    _write_manifest(out, manifest)

    log.info("explaining %d instances against %d references", len(test), len(train))
    result = explain_batch(clf, test, train, config, parallel, s["ynn_mode"], scope)
    for qid, status in result.errors.items():
        log.info("%s: %s", qid, status)
    _write_reports(out, result.reports, manifest)
    (out / "metrics.json").write_text(dumps(result.summary.to_dict()), encoding="utf-8")

    if sweep == "alpha":
        rows = []
        for a in ALPHA_GRID:
            reports = [reselect(r, a) for r in result.reports]
            summary = summarize(clf, reports, train, len(test), ynn_mode=s["ynn_mode"], scope=scope)
            rows.append(_sweep_row({"alpha": a, "theta": config.theta}, summary))
        _write_csv(out / "sweep.csv", rows)
    elif sweep == "theta":
        rows = []
        for th in THETA_GRID:
            log.info("sweep: theta=%s", th)
            res = explain_batch(clf, test, train, replace(config, theta=th), parallel, s["ynn_mode"], scope)
            rows.append(_sweep_row({"alpha": config.alpha, "theta": th}, res.summary))
        _write_csv(out / "sweep.csv", rows)
    print(dumps(result.summary.to_dict()), end="")
    return EXIT_OK


def cmd_metrics(args) -> int:
    s = _settings(args)
    rdir = Path(s["reports"])
    if not rdir.is_dir():
        raise CliError(f"missing report directory: {rdir}")
    files = sorted(rdir.glob("*.json"))
    if not files:
        raise CliError(f"no reports in {rdir}")
    train, test, _ = _load(s)
    reports, manifests = [], []
    for f in files:
        r, m = read_report(f, test)
        reports.append(r)
        manifests.append(m)
    recorded = manifests[0]
    # run-time settings win unless overridden on the command line
    if recorded.get("classifier", {}).get("kind") == "centroid" and args.temperature is None:
        s["temperature"] = recorded["classifier"]["temperature"]
    if args.ynn_mode is None and "metrics" in recorded:
        s["ynn_mode"] = recorded["metrics"]["ynn_mode"]
    scope = s.get("metric_scope") or recorded.get("metrics", {}).get("scope", "all")
    clf = _classifier(s, train)
    summary = summarize(clf, reports, train, len(reports), ynn_mode=s["ynn_mode"], scope=scope)
    text = dumps(summary.to_dict())
    if s.get("out"):
        Path(s["out"]).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_nun(args) -> int:
    s = _settings(args)
    train, test, _ = _load(s)
    config = _engine_config(s)
    query = _pick_query(test, s.get("query"))
    clf = _classifier(s, train)
    res = find_nun(clf, query, train, config.theta, config.nun_distance)
    if res is None:
        raise CliError("no nearest unlike neighbor for this instance", EXIT_NO_NUN)
    print(dumps({
        "query_id": query.id,
        "query_class": clf.predict(query),
        "nun_id": res.nun.id,
        "nun_index": res.nun_index,
        "target_class": res.target_class,
        "confidence": res.confidence,
        "distance": res.distance,
    }), end="")
    return EXIT_OK


COMMANDS = {"explain": cmd_explain, "benchmark": cmd_benchmark, "metrics": cmd_metrics, "nun": cmd_nun}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore")
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (MtscfError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    finally:
        while _OPEN:
            _OPEN.pop().close()


if __name__ == "__main__":
    sys.exit(main())
