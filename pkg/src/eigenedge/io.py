"""Plain-text matrix files and deterministic CSV output.

Numbers are written with ``repr``-style 17 significant digits, which
round-trips every double and does not depend on the process locale.
"""
from __future__ import annotations

import json
import os

import numpy as np

from .errors import FormatError

__all__ = ["format_number", "write_csv", "read_csv", "read_matrix", "write_matrix", "write_json", "ensure_dir"]

ASYMMETRY_TOL = 1e-12


def format_number(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def write_csv(path, header, rows) -> None:
    header = list(header)
    lines = [",".join(header)]
    for row in rows:
        row = list(row)
        if len(row) != len(header):
            raise FormatError(f"{path}: row has {len(row)} fields, header has {len(header)}")
        lines.append(",".join(format_number(v) for v in row))
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise FormatError(f"cannot write {path}: {exc.strerror}") from exc


def read_csv(path) -> tuple[list[str], np.ndarray]:
    try:
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    return header, data


def write_matrix(path, M) -> None:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise FormatError(f"{path}: expected a 2-D matrix, got shape {M.shape}")
    dims = str(M.shape[0]) if M.shape[0] == M.shape[1] else f"{M.shape[0]} {M.shape[1]}"
    lines = [dims] + [" ".join(format_number(v) for v in row) for row in M]
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise FormatError(f"cannot write {path}: {exc.strerror}") from exc


def read_matrix(path, symmetric: bool = True) -> np.ndarray:
    """Read ``n`` then ``n`` rows of ``n`` numbers; reject asymmetry beyond 1e-12.

    With ``symmetric=False`` the first line may be ``p1 p2`` for a rectangular matrix.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in (s.strip() for s in fh) if ln]
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    if not lines:
        raise FormatError(f"{path}: empty file")
    try:
        dims = [int(t) for t in lines[0].split()]
        rows = [[float(t) for t in ln.split()] for ln in lines[1:]]
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    if len(dims) not in (1, 2) or min(dims) < 1:
        raise FormatError(f"{path}: first line must be 'n' or 'p1 p2'")
    n1, n2 = dims[0], dims[-1]
    if len(rows) != n1 or any(len(r) != n2 for r in rows):
        raise FormatError(f"{path}: expected {n1} rows of {n2} values")
    M = np.array(rows)
    if not np.all(np.isfinite(M)):
        raise FormatError(f"{path}: non-finite entries")
    if symmetric and n1 != n2:
        raise FormatError(f"{path}: expected a square matrix, got {n1} x {n2}")
    if symmetric and np.max(np.abs(M - M.T)) > ASYMMETRY_TOL:
        raise FormatError(f"{path}: matrix is not symmetric (max |M - M^T| = {np.max(np.abs(M - M.T)):.3e})")
    return M


def write_json(path, obj) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise FormatError(f"cannot write {path}: {exc.strerror}") from exc


def ensure_dir(path) -> None:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise FormatError(f"cannot create {path}: {exc.strerror}") from exc
