"""Result persistence. Files are written to a temporary sibling and renamed."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

from ..errors import ConfigError
from .runner import RegretTrace

__all__ = ["atomic_write_text", "trace_to_csv", "trace_to_json", "write_trace"]


def atomic_write_text(path: str | Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trace_to_csv(trace: RegretTrace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    k = trace.n_arms
    writer.writerow(["checkpoint_t", "regret_mean", "regret_stderr"] + [f"pulls_arm_{i + 1}_mean" for i in range(k)])
    mean, stderr, pulls = trace.regret_mean, trace.regret_stderr, trace.pulls_mean
    for j, t in enumerate(trace.checkpoints):
        writer.writerow([t, repr(float(mean[j])), repr(float(stderr[j]))] + [repr(float(p)) for p in pulls[j]])
    return buf.getvalue()


def trace_to_json(trace: RegretTrace, config: dict | None = None) -> str:
    record = {
        "checkpoints": list(trace.checkpoints),
        "aggregate": {
            "regret_mean": trace.regret_mean.tolist(),
            "regret_stderr": trace.regret_stderr.tolist(),
            "pulls_mean": trace.pulls_mean.tolist(),
        },
        "repetitions": [
            {
                "index": r,
                "regret": trace.regret[r].tolist(),
                "final_pulls": trace.final_pulls[r].tolist(),
                **({"arms": trace.arms[r].tolist()} if trace.arms is not None else {}),
            }
            for r in range(trace.repetitions)
        ],
    }
    if config is not None:
        record = {"config": config, **record}
    return json.dumps(record, indent=1) + "\n"


def write_trace(trace: RegretTrace, path: str | Path, fmt: str = "csv", config: dict | None = None):
    if fmt == "csv":
        text = trace_to_csv(trace)
    elif fmt == "json":
        text = trace_to_json(trace, config)
    else:
        raise ConfigError(f"unknown format {fmt!r}; expected csv or json", "format")
    atomic_write_text(path, text)
