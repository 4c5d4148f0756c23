# File: smoothbench/runner/matrix_market.py

"""Matrix Market ingest for system and prior matrices.

Files are checked line by line first so that malformed input is reported with a line
number and the offending token; the values themselves are then read with scipy.io.
"""

from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy import io as sio
from scipy import sparse

from smoothbench.core import matops
from smoothbench.core.errors import MatrixMarketParseError
from smoothbench.models.belief import GaussianBelief
from smoothbench.models.lti_types import LtiSystem
from smoothbench.utils.rich_output import log, warn

PathLike = Union[str, Path]

_FORMATS = {"coordinate", "array"}
_FIELDS = {"real", "double", "integer"}
_SYMMETRIES = {"general", "symmetric"}


def _parse_int(path: str, lineno: int, token: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise MatrixMarketParseError(path, "expected an integer", lineno, token) from None
    if value < 0:
        raise MatrixMarketParseError(path, "negative size", lineno, token)
    return value


def _parse_float(path: str, lineno: int, token: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise MatrixMarketParseError(path, "expected a real number", lineno, token) from None
    if not np.isfinite(value):
        raise MatrixMarketParseError(path, "non-finite entry", lineno, token)
    return value


def validate_file(path: PathLike) -> tuple[int, int]:
    """Check header, size line and every entry; returns (rows, cols)."""
    p = str(path)
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as err:
        raise MatrixMarketParseError(p, f"cannot read file: {err.strerror}") from err
    if not lines:
        raise MatrixMarketParseError(p, "empty file", 1)

    header = lines[0].split()
    if len(header) != 5:
        raise MatrixMarketParseError(p, "header must have five tokens", 1, lines[0].strip())
    banner, obj, fmt, field, symmetry = (t.lower() for t in header)
    if banner != "%%matrixmarket":
        raise MatrixMarketParseError(p, "missing %%MatrixMarket banner", 1, header[0])
    if obj != "matrix":
        raise MatrixMarketParseError(p, "only 'matrix' objects are supported", 1, header[1])
    if fmt not in _FORMATS:
        raise MatrixMarketParseError(p, "unknown format", 1, header[2])
    if field not in _FIELDS:
        raise MatrixMarketParseError(p, "only real matrices are supported", 1, header[3])
    if symmetry not in _SYMMETRIES:
        raise MatrixMarketParseError(p, "unsupported symmetry", 1, header[4])

    body = [
        (i + 1, line.split())
        for i, line in enumerate(lines[1:], start=1)
        if line.strip() and not line.lstrip().startswith("%")
    ]
    if not body:
        raise MatrixMarketParseError(p, "missing size line", len(lines))
    size_line, size_tokens = body[0]
    expected = 3 if fmt == "coordinate" else 2
    if len(size_tokens) != expected:
        raise MatrixMarketParseError(
            p, f"size line needs {expected} integers", size_line, " ".join(size_tokens)
        )
    sizes = [_parse_int(p, size_line, t) for t in size_tokens]
    rows, cols = sizes[0], sizes[1]

    entries = body[1:]
    if fmt == "coordinate":
        count = sizes[2]
        for lineno, tokens in entries:
            if len(tokens) != 3:
                raise MatrixMarketParseError(p, "entry needs row, column and value", lineno, " ".join(tokens))
            i, j = _parse_int(p, lineno, tokens[0]), _parse_int(p, lineno, tokens[1])
            if not (1 <= i <= rows and 1 <= j <= cols):
                raise MatrixMarketParseError(p, f"index outside {rows}×{cols}", lineno, f"{i} {j}")
            _parse_float(p, lineno, tokens[2])
    else:
        count = rows * cols if symmetry == "general" else rows * (rows + 1) // 2
        for lineno, tokens in entries:
            if len(tokens) != 1:
                raise MatrixMarketParseError(p, "array entry needs one value", lineno, " ".join(tokens))
            _parse_float(p, lineno, tokens[0])
    if len(entries) != count:
        last = entries[-1][0] if entries else size_line
        raise MatrixMarketParseError(p, f"expected {count} entries, found {len(entries)}", last)
    return rows, cols


def read_matrix(path: PathLike) -> np.ndarray:
    validate_file(path)
    try:
        m = sio.mmread(str(path))
    except ValueError as err:
        raise MatrixMarketParseError(str(path), str(err)) from err
    dense = m.toarray() if sparse.issparse(m) else np.asarray(m)
    return np.asarray(dense, dtype=np.float64)


def write_matrix(path: PathLike, m: np.ndarray, comment: str = "") -> None:
    sio.mmwrite(str(path), np.asarray(m, dtype=np.float64), comment=comment, field="real", precision=17)


def load_system(directory: PathLike, require_b: bool = False) -> LtiSystem:
    """Read A.mtx, C.mtx and (when present) B.mtx from one directory."""
    root = Path(directory)
    a = read_matrix(root / "A.mtx")
    c = read_matrix(root / "C.mtx")
    b_path = root / "B.mtx"
    b: Optional[np.ndarray] = None
    if b_path.exists():
        b = read_matrix(b_path)
    elif require_b:
        raise MatrixMarketParseError(str(b_path), "input operator B is required for this prior")

    d = a.shape[0]
    if a.shape != (d, d):
        raise MatrixMarketParseError(str(root / "A.mtx"), f"A must be square, got {a.shape[0]}×{a.shape[1]}")
    if c.shape[1] != d:
        raise MatrixMarketParseError(str(root / "C.mtx"), f"C has {c.shape[1]} columns, A is {d}×{d}")
    if b is not None and b.shape[0] != d:
        raise MatrixMarketParseError(str(b_path), f"B has {b.shape[0]} rows, A is {d}×{d}")

    sys = LtiSystem(a=a, c=c, b=b)
    log("MTX", f"loaded system from {root}: d={sys.d}, d_in={sys.d_in}, d_out={sys.d_out}")
    if not sys.stable:
        _, worst = matops.stability_margin(sys.a)
        warn("MTX", f"system in {root} is not stable (eigenvalue {worst:.4g}); Gramian methods will refuse it")
    return sys


def load_prior(path: PathLike) -> GaussianBelief:
    """Centered prior from a d×s covariance factor stored in Matrix Market form."""
    factor = read_matrix(path)
    prior = GaussianBelief.centered(matops.symmetric_factor(factor))
    log("MTX", f"loaded prior factor {factor.shape[0]}×{factor.shape[1]} (rank {prior.rank})")
    return prior


def load_vector(path: PathLike) -> np.ndarray:
    m = read_matrix(path)
    if 1 not in m.shape:
        raise MatrixMarketParseError(str(path), f"expected a vector, got {m.shape[0]}×{m.shape[1]}")
    return m.ravel()
