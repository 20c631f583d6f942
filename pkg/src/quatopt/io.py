"""File formats.

Quaternion matrices and vectors are CSV files with a header ``m,n`` followed
by rows ``i,j,a,b,c,d`` (0-based indices, four real components).  Missing
entries are zero; vectors are stored as ``m x 1`` matrices.  Composite
objects are described by small JSON manifests whose paths are relative to the
manifest's directory.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .affine import WidelyAffineMap
from .linalg import QArray, qzeros

__all__ = [
    "QuatFormatError",
    "read_qmatrix",
    "read_qvector",
    "write_qarray",
    "save_affine_map",
    "load_affine_map",
    "load_wlls_manifest",
    "save_wlls_manifest",
]


class QuatFormatError(ValueError):
    """Malformed quaternion CSV or manifest; the message names file and line."""

    def __init__(self, path, line, msg):
        self.path, self.line = str(path), line
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {msg}")


def _parse_ints(path, lineno, fields, count, what):
    if len(fields) != count:
        raise QuatFormatError(path, lineno, f"expected {count} fields for {what}, got {len(fields)}")
    try:
        return [int(f) for f in fields]
    except ValueError:
        raise QuatFormatError(path, lineno, f"non-integer {what}: {','.join(fields)!r}") from None


def read_qmatrix(path) -> QArray:
    """Read a quaternion matrix of shape ``(m, n)``."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise QuatFormatError(path, None, f"cannot read file ({exc.strerror})") from exc
    rows = [(i + 1, ln.strip()) for i, ln in enumerate(lines) if ln.strip()]
    if not rows:
        raise QuatFormatError(path, 1, "empty file, expected header 'm,n'")
    lineno, header = rows[0]
    m, n = _parse_ints(path, lineno, header.split(","), 2, "header m,n")
    if m < 0 or n < 0:
        raise QuatFormatError(path, lineno, "dimensions must be non-negative")
    data = np.zeros((4, m, n))
    for lineno, text in rows[1:]:
        fields = [f.strip() for f in text.split(",")]
        if len(fields) != 6:
            raise QuatFormatError(path, lineno, f"expected 6 fields i,j,a,b,c,d, got {len(fields)}")
        i, j = _parse_ints(path, lineno, fields[:2], 2, "indices")
        if not (0 <= i < m and 0 <= j < n):
            raise QuatFormatError(path, lineno, f"index ({i},{j}) outside {m}x{n}")
        try:
            vals = [float(f) for f in fields[2:]]
        except ValueError:
            raise QuatFormatError(path, lineno, "non-numeric component") from None
        if not np.all(np.isfinite(vals)):
            raise QuatFormatError(path, lineno, "non-finite component")
        data[:, i, j] = vals
    return QArray(data)


def read_qvector(path) -> QArray:
    X = read_qmatrix(path)
    if X.shape[1] != 1:
        raise QuatFormatError(path, 1, f"expected a vector (n=1), got {X.shape[0]}x{X.shape[1]}")
    return X.reshape((X.shape[0],))


def write_qarray(path, X: QArray) -> None:
    """Write a matrix or vector; zero entries are omitted."""
    d = X.data if X.ndim == 2 else X.data[:, :, None]
    m, n = d.shape[1:]
    out = [f"{m},{n}"]
    for i in range(m):
        for j in range(n):
            v = d[:, i, j]
            if np.any(v):
                out.append(",".join([str(i), str(j)] + [repr(float(x)) for x in v]))
    Path(path).write_text("\n".join(out) + "\n")


def _load_manifest(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise QuatFormatError(path, None, f"cannot read manifest ({exc.strerror})") from exc
    try:
        man = json.loads(text)
    except json.JSONDecodeError as exc:
        raise QuatFormatError(path, exc.lineno, f"invalid JSON: {exc.msg}") from None
    if not isinstance(man, dict) or not isinstance(man.get("paths"), dict):
        raise QuatFormatError(path, None, "manifest must be an object with a 'paths' mapping")
    return man, path.parent


def _resolve(base, p):
    return p if os.path.isabs(p) else base / p


def save_affine_map(A: WidelyAffineMap, directory, stem: str = "A") -> Path:
    """Write four matrix files, the offset and ``<stem>.json``; returns the manifest path."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, X in zip(("A1", "A2", "A3", "A4", "b"), A.matrices + (A.b,)):
        fname = f"{stem}_{name}.csv"
        write_qarray(d / fname, X)
        paths[name] = fname
    man = d / f"{stem}.json"
    man.write_text(json.dumps({"p": A.p, "n": A.n, "paths": paths}, indent=2) + "\n")
    return man


def load_affine_map(path) -> WidelyAffineMap:
    man, base = _load_manifest(path)
    try:
        p, n = int(man["p"]), int(man["n"])
        files = [man["paths"][k] for k in ("A1", "A2", "A3", "A4", "b")]
    except (KeyError, TypeError, ValueError) as exc:
        raise QuatFormatError(path, None, f"missing or invalid field: {exc}") from None
    mats = [read_qmatrix(_resolve(base, f)) for f in files[:4]]
    b = read_qvector(_resolve(base, files[4]))
    for f, M in zip(files, mats):
        if M.shape != (p, n):
            raise QuatFormatError(_resolve(base, f), 1, f"shape {M.shape} does not match manifest ({p},{n})")
    if b.shape != (p,):
        raise QuatFormatError(_resolve(base, files[4]), 1, f"length {b.shape[0]} does not match p={p}")
    return WidelyAffineMap(*mats, b)


def load_wlls_manifest(path):
    """Read ``{"m", "n", "constraint", "paths": {"P1".."P4", "y"}}``.

    ``P2``..``P4`` may be omitted (zero).  Returns a :class:`WLLSProblem`.
    """
    from .solvers import CONSTRAINTS, WLLSProblem

    man, base = _load_manifest(path)
    paths = man["paths"]
    constraint = man.get("constraint", "nonneg_parts")
    if constraint not in CONSTRAINTS:
        raise QuatFormatError(path, None, f"unknown constraint {constraint!r}; use one of {CONSTRAINTS}")
    for key in ("P1", "y"):
        if key not in paths:
            raise QuatFormatError(path, None, f"paths.{key} is required")
    P1 = read_qmatrix(_resolve(base, paths["P1"]))
    shape = P1.shape
    if "m" in man and "n" in man and (int(man["m"]), int(man["n"])) != shape:
        raise QuatFormatError(_resolve(base, paths["P1"]), 1,
                              f"shape {shape} does not match manifest ({man['m']},{man['n']})")
    mats = [P1]
    for key in ("P2", "P3", "P4"):
        if key in paths:
            M = read_qmatrix(_resolve(base, paths[key]))
            if M.shape != shape:
                raise QuatFormatError(_resolve(base, paths[key]), 1, f"shape {M.shape}, expected {shape}")
            mats.append(M)
        else:
            mats.append(qzeros(shape))
    y = read_qvector(_resolve(base, paths["y"]))
    if y.shape != (shape[0],):
        raise QuatFormatError(_resolve(base, paths["y"]), 1, f"length {y.shape[0]}, expected {shape[0]}")
    return WLLSProblem(*mats, y, constraint)


def save_wlls_manifest(P, directory, stem: str = "wlls") -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, X in (("P1", P.P1), ("P2", P.P2), ("P3", P.P3), ("P4", P.P4), ("y", P.y)):
        fname = f"{stem}_{name}.csv"
        write_qarray(d / fname, X)
        paths[name] = fname
    m, n = P.P1.shape
    man = d / f"{stem}.json"
    man.write_text(json.dumps({"m": m, "n": n, "constraint": P.constraint, "paths": paths}, indent=2) + "\n")
    return man
