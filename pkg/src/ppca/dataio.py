"""File formats: full-precision CSV matrices, run manifests, result bundles.

Numbers are written with Python's shortest round-trip representation so
an export/import cycle reproduces every matrix bit for bit, which is
what makes the reproducibility guarantees of the CLI checkable.
"""

from __future__ import annotations

import datetime
import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__
from .exceptions import InputError


def _fmt(v: float) -> str:
    return repr(float(v))


def write_matrix(path, M: np.ndarray, header=None) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    lines = []
    if header is not None:
        if len(header) != M.shape[1]:
            raise InputError("header length does not match column count")
        lines.append(",".join(header))
    for row in M:
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path):
    """Read a CSV matrix, tolerating an optional single header row.

    Returns ``(matrix, header_or_None)``.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"file not found: {path}")
    text = path.read_text().strip()
    if not text:
        raise InputError(f"empty file: {path}")
    lines = text.splitlines()
    header = None
    first = lines[0].split(",")
    try:
        [float(v) for v in first]
    except ValueError:
        header = [h.strip() for h in first]
        lines = lines[1:]
        if not lines:
            raise InputError(f"{path}: header but no data rows")
    rows = []
    width = None
    for i, line in enumerate(lines):
        parts = line.split(",")
        if width is None:
            width = len(parts)
        elif len(parts) != width:
            raise InputError(f"{path}: row {i + 1} has {len(parts)} fields, expected {width}")
        try:
            rows.append([float(v) for v in parts])
        except ValueError as exc:
            raise InputError(f"{path}: row {i + 1}: {exc}") from exc
    return np.asarray(rows), header


def sha256_file(path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def write_manifest(path, command: str, config: dict, seed, input_paths=()) -> dict:
    """Write the run manifest capturing everything needed to reproduce."""
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "tool_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "input_checksums": {
            str(p): sha256_file(p) for p in input_paths if Path(p).exists()
        },
    }
    Path(path).write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def write_fit_bundle(out_dir, fit, basis_spec_json: str, m: int) -> None:
    """FitResult as a directory of CSVs plus a JSON summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    K = fit.k
    write_matrix(out / "factors.csv", fit.f_hat, header=[f"f{k + 1}" for k in range(K)])
    if fit.g_hat is not None:
        write_matrix(out / "loadings_g.csv", fit.g_hat)
    if fit.gamma_hat is not None:
        write_matrix(out / "loadings_gamma.csv", fit.gamma_hat)
    write_matrix(out / "loadings_lambda.csv", fit.lambda_hat)
    if fit.b_hat is not None:
        write_matrix(out / "coefficients.csv", fit.b_hat)
    summary = {
        "K": K,
        "m": m,
        "eigenvalues": [float(v) for v in fit.eigvals],
        "method": fit.method,
        "spec": json.loads(basis_spec_json),
    }
    (out / "fit.json").write_text(json.dumps(summary, indent=2) + "\n")


def write_aggregate_csv(path, rows) -> None:
    cols = ["design", "p", "T", "method", "metric", "mean", "sd", "n", "n_failed"]
    lines = [",".join(cols)]
    for row in rows:
        lines.append(
            ",".join(
                _fmt(row[c]) if isinstance(row[c], float) else str(row[c])
                for c in cols
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_raw_errors_csv(path, raw_records) -> None:
    lines = ["p,T,rep,J,method,metric,value"]
    for rec in raw_records:
        for (method, metric), value in sorted(rec["metrics"].items()):
            lines.append(
                f"{rec['p']},{rec['T']},{rec['rep']},{rec['J']},"
                f"{method},{metric},{_fmt(value)}"
            )
    Path(path).write_text("\n".join(lines) + "\n")
