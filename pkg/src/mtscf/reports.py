"""JSON and CSV serialization of counterfactual reports and run manifests."""
from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path
from typing import Any

import numpy as np

from .core import LabeledDataset, MtsInstance, Subsequence
from .engine import Counterfactual, CounterfactualReport
from .errors import StructuralError


def file_sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def manifest_id(manifest: dict) -> str:
    return hashlib.sha256(json.dumps(manifest, sort_keys=True).encode()).hexdigest()[:16]


def report_to_dict(report: CounterfactualReport, manifest: dict | None = None) -> dict[str, Any]:
    """Plain-JSON view of a report. Wall time is left out so output is reproducible."""
    return {
        "manifest": manifest if manifest is not None else {},
        "query_id": report.query_id,
        "query_class": report.query_class,
        "status": report.status,
        "nun_id": report.nun_id,
        "target_class": report.target_class,
        "ces": [
            {
                "series": ce.instance.values.tolist(),
                "m1": ce.m1,
                "m2": ce.m2,
                "m3": ce.m3,
                "window": {"s": ce.window.start, "e": ce.window.end},
                "genome": ce.genome.astype(int).tolist(),
                "proba": ce.proba.tolist(),
                "origin": ce.origin,
            }
            for ce in report.ces
        ],
        "best_index": report.best_index,
        "c0_hamming": report.c0_hamming,
        "probes": [[k, ok] for k, ok in report.probes],
        "call_counts": dict(report.call_counts),
    }


def report_from_dict(doc: dict[str, Any], queries: LabeledDataset | MtsInstance) -> CounterfactualReport:
    """Rebuild a report; the query series comes from ``queries`` (looked up by ``query_id``)."""
    try:
        qid = doc["query_id"]
        query = queries if isinstance(queries, MtsInstance) else queries.get(qid)
        if query.id != qid:
            raise StructuralError(f"query id {query.id!r} does not match report {qid!r}")
        ces = [
            Counterfactual(
                instance=MtsInstance(ce["series"], id=qid),
                m1=float(ce["m1"]),
                m2=float(ce["m2"]),
                m3=float(ce["m3"]),
                window=Subsequence(ce["window"]["s"], ce["window"]["e"]),
                genome=np.array(ce.get("genome", []), dtype=bool),
                proba=np.array(ce.get("proba", []), dtype=np.float64),
                origin=ce.get("origin", ""),
            )
            for ce in doc["ces"]
        ]
        return CounterfactualReport(
            query=query,
            query_class=int(doc.get("query_class", -1)),
            nun_id=doc["nun_id"],
            target_class=doc["target_class"],
            ces=ces,
            best_index=doc["best_index"],
            call_counts=dict(doc.get("call_counts", {})),
            probes=[(int(k), bool(ok)) for k, ok in doc.get("probes", [])],
            c0_hamming=doc.get("c0_hamming"),
            status=doc.get("status", "ok" if ces else "no_counterfactual"),
        )
    except (KeyError, TypeError) as exc:
        raise StructuralError(f"malformed report document: {exc}") from None


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=1) + "\n"


def write_report(path: str | Path, report: CounterfactualReport, manifest: dict | None = None) -> None:
    Path(path).write_text(dumps(report_to_dict(report, manifest)), encoding="utf-8")


def read_report(path: str | Path, queries: LabeledDataset) -> tuple[CounterfactualReport, dict]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return report_from_dict(doc, queries), doc.get("manifest", {})


def series_to_csv(values: np.ndarray) -> str:
    """One row per time step, one column per channel, with a header."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"ch{j}" for j in range(values.shape[1])])
    for row in values:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()
