# File: smoothbench/models/arrays.py

# Pydantic-friendly numpy carriers. Every model field holding numbers goes through one of these,
# so arrays are float64, finite and read-only once they sit inside a model.

from typing import Annotated, Any

import numpy as np
from pydantic import BeforeValidator


def _frozen(value: Any, ndim: int) -> np.ndarray:
    arr = np.array(value, dtype=np.float64, copy=True)
    if ndim == 2 and arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, 0)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("array contains NaN or Inf entries")
    arr.flags.writeable = False
    return arr


def as_matrix(value: Any) -> np.ndarray:
    return _frozen(value, 2)


def as_vector(value: Any) -> np.ndarray:
    return _frozen(value, 1)


def as_tensor3(value: Any) -> np.ndarray:
    return _frozen(value, 3)


# DenseMatrix: rows × cols real entries, finite on construction.
Matrix = Annotated[np.ndarray, BeforeValidator(as_matrix)]
Vector = Annotated[np.ndarray, BeforeValidator(as_vector)]
Tensor3 = Annotated[np.ndarray, BeforeValidator(as_tensor3)]
