"""JSON and CSV exchange formats.

Matrices are ``{"n", "d", "real", "data"}`` with ``data`` a list of rows; complex
entries are ``[re, im]`` pairs. Floats are written with Python's shortest
round-trip repr, so real doubles survive a write/read cycle bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .bandfrac import YMatrix
from .bidiag import EigenSpec
from .core import BandFraction, InputPair, LowerBanded, as_field, is_real

__all__ = [
    "matrix_to_json",
    "matrix_from_json",
    "banded_to_json",
    "banded_from_json",
    "eigenspec_to_json",
    "eigenspec_from_json",
    "bandfrac_to_json",
    "bandfrac_from_json",
    "ymatrix_to_json",
    "ymatrix_from_json",
    "pair_to_json",
    "pair_from_json",
    "dumps",
    "read_json",
    "write_text",
    "series_to_csv",
    "read_series_csv",
    "read_dataset_csv",
]


def _scalar(x, real: bool):
    if real:
        return float(np.real(x))
    return [float(np.real(x)), float(np.imag(x))]


def _parse_scalar(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex entry must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"not a number: {v!r}")
    return float(v)


def _rows(a, real):
    return [[_scalar(x, real) for x in row] for row in a]


def matrix_to_json(a, d: int | None = None) -> dict:
    """Rectangular matrix; ``d`` defaults to the column count."""
    a = np.atleast_2d(np.asarray(a))
    real = is_real(a)
    return {"n": a.shape[0], "d": a.shape[1] if d is None else int(d), "real": real, "data": _rows(a, real)}


def _load_rows(obj) -> np.ndarray:
    data = obj["data"]
    if not isinstance(data, list) or not all(isinstance(r, list) for r in data):
        raise ValueError("matrix data must be a list of rows")
    width = {len(r) for r in data}
    if len(width) > 1:
        raise ValueError("ragged matrix rows")
    vals = [[_parse_scalar(v) for v in row] for row in data]
    a = as_field(np.array(vals, dtype=np.complex128) if vals else np.zeros((0, 0)))
    if a.ndim == 1:
        a = a.reshape(len(vals), -1)
    if obj.get("real", True) and np.iscomplexobj(a):
        raise ValueError("matrix flagged real carries complex entries")
    if "n" in obj and int(obj["n"]) != a.shape[0]:
        raise ValueError(f"declared n={obj['n']} but data has {a.shape[0]} rows")
    return a


def matrix_from_json(obj) -> np.ndarray:
    a = _load_rows(obj)
    if "d" in obj and int(obj["d"]) != a.shape[1]:
        raise ValueError(f"declared d={obj['d']} but data has {a.shape[1]} columns")
    return a


def banded_to_json(m: LowerBanded) -> dict:
    return matrix_to_json(m.to_dense(), d=m.d)


def banded_from_json(obj) -> LowerBanded:
    a = _load_rows(obj)
    return LowerBanded.from_dense(a, int(obj["d"]))


def eigenspec_to_json(spec: EigenSpec) -> dict:
    return {"lambdas": [_scalar(x, spec.real) for x in spec.lambdas], "order": spec.order}


def eigenspec_from_json(obj) -> EigenSpec:
    if not isinstance(obj, dict) or "lambdas" not in obj:
        raise ValueError("eigenvalue spec needs a 'lambdas' list")
    lam = [_parse_scalar(v) for v in obj["lambdas"]]
    return EigenSpec(np.array(lam), order=obj.get("order", "as-given"))


def bandfrac_to_json(bf: BandFraction) -> dict:
    return {"M": banded_to_json(bf.M), "N": banded_to_json(bf.N), "Bhat": matrix_to_json(bf.Bhat)}


def bandfrac_from_json(obj) -> BandFraction:
    return BandFraction(banded_from_json(obj["M"]), banded_from_json(obj["N"]), matrix_from_json(obj["Bhat"]))


def ymatrix_to_json(Y: YMatrix) -> dict:
    real = is_real(Y.band)
    return {"n": Y.n, "d": Y.d, "band": _rows(Y.band, real)}


def ymatrix_from_json(obj) -> YMatrix:
    band = np.array([[_parse_scalar(v) for v in row] for row in obj["band"]], dtype=np.complex128)
    if band.shape != (int(obj["n"]), int(obj["d"]) + 1):
        raise ValueError(f"band must be {obj['n']} x {int(obj['d']) + 1}, got {band.shape}")
    return YMatrix(band)


def pair_to_json(A, B, C=None) -> dict:
    out = {"A": matrix_to_json(A), "B": matrix_to_json(B)}
    if C is not None:
        out["C"] = matrix_to_json(C)
    return out


def pair_from_json(obj) -> tuple[InputPair, np.ndarray | None]:
    pair = InputPair(matrix_from_json(obj["A"]), matrix_from_json(obj["B"]))
    C = matrix_from_json(obj["C"]) if "C" in obj else None
    return pair, C


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=True) + "\n"


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_text(path, text: str) -> None:
    if path is None or str(path) == "-":
        import sys

        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _fmt(x) -> list[str]:
    if np.iscomplexobj(x) and np.imag(x) != 0:
        return [f"{x.real:.17g}", f"{x.imag:.17g}"]
    return [f"{float(np.real(x)):.17g}"]


def series_to_csv(columns: dict[str, np.ndarray], t0: int = 1) -> str:
    """CSV with a leading ``t`` column; complex columns are split into ``_re``/``_im``."""
    names, blocks = ["t"], []
    for prefix, arr in columns.items():
        arr = np.atleast_2d(np.asarray(arr).T).T
        cplx = not is_real(arr)
        for k in range(arr.shape[1]):
            if cplx:
                names += [f"{prefix}_{k + 1}_re", f"{prefix}_{k + 1}_im"]
                blocks.append(arr[:, k].real)
                blocks.append(arr[:, k].imag)
            else:
                names.append(f"{prefix}_{k + 1}")
                blocks.append(np.real(arr[:, k]))
    T = blocks[0].shape[0] if blocks else 0
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for t in range(T):
        w.writerow([str(t + t0)] + [f"{b[t]:.17g}" for b in blocks])
    return buf.getvalue()


def _read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "t":
        raise ValueError(f"{path}: first column must be 't'")
    body = [r for r in rows[1:] if r]
    if any(len(r) != len(header) for r in body):
        raise ValueError(f"{path}: row width does not match header")
    data = np.array([[float(x) for x in r] for r in body]) if body else np.zeros((0, len(header)))
    return header, data


def _columns(header, data, prefix) -> np.ndarray:
    re_idx = [i for i, h in enumerate(header) if h.startswith(prefix + "_") and not h.endswith("_im")]
    im_idx = {h[: -len("_im")]: i for i, h in enumerate(header) if h.startswith(prefix + "_") and h.endswith("_im")}
    cols = []
    for i in re_idx:
        h = header[i]
        base = h[: -len("_re")] if h.endswith("_re") else h
        col = data[:, i].astype(np.complex128 if base in im_idx else np.float64)
        if base in im_idx:
            col = col + 1j * data[:, im_idx[base]]
        cols.append(col)
    if not cols:
        return np.zeros((data.shape[0], 0))
    return as_field(np.stack(cols, axis=1))


def read_series_csv(path, prefix: str = "eps") -> np.ndarray:
    header, data = _read_csv(path)
    out = _columns(header, data, prefix)
    if out.shape[1] == 0:
        raise ValueError(f"{path}: no '{prefix}_k' columns")
    return out


def read_dataset_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """``(u, y)`` from a ``t,u_1..u_d,y_1..y_p`` file."""
    header, data = _read_csv(path)
    u = _columns(header, data, "u")
    y = _columns(header, data, "y")
    if u.shape[1] == 0 or y.shape[1] == 0:
        raise ValueError(f"{path}: need u_k and y_k columns")
    return u, y
