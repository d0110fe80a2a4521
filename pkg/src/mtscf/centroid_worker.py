"""Out-of-process centroid classifier speaking the line protocol.

Usage::

    python -m mtscf.centroid_worker --train train.ts [--temperature 1.0]
    python -m mtscf.centroid_worker --model centroids.json

Reads one JSON request per line on stdin and writes one reply per line.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .classifier import CentroidClassifier
from .ingest import load_dataset


def serve(model: CentroidClassifier, stdin=sys.stdin, stdout=sys.stdout) -> None:
    for line in stdin:
        if not line.strip():
            continue
        try:
            req = json.loads(line)
            op = req.get("op")
            if op == "hello":
                reply = {"n_classes": model.n_classes}
            elif op == "predict":
                reply = {"proba": model.predict_proba(req["series"]).tolist()}
            else:
                reply = {"error": f"unknown op {op!r}"}
        except Exception as exc:  # reported to the parent, never fatal here
            reply = {"error": str(exc)}
        stdout.write(json.dumps(reply) + "\n")
        stdout.flush()


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="python -m mtscf.centroid_worker")
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--train", help="training dataset (.ts, .json)")
    src.add_argument("--model", help="JSON dump of a fitted centroid model")
    ap.add_argument("--temperature", type=float, default=1.0)
    args = ap.parse_args(argv)
    if args.model:
        model = CentroidClassifier.from_dict(json.loads(Path(args.model).read_text()))
    else:
        model = CentroidClassifier.fit(load_dataset(args.train), args.temperature)
    serve(model)
    return 0


if __name__ == "__main__":
    sys.exit(main())
