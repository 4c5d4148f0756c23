# File: smoothbench/reducers/reducer_types.py

from typing import Optional, Protocol

import numpy as np

from smoothbench.models.belief import SmoothingProblem
from smoothbench.models.posterior import BoundReport, PosteriorApprox, ReducerName


class ReducerProtocol(Protocol):
    @property
    def name(self) -> ReducerName: ...

    @property
    def attainable_rank(self) -> int: ...

    # Builds everything that does not depend on data (Gramians, bases) and returns the
    # largest rank `posterior` will accept. Must be called once before the other methods.
    def prepare(self, problem: SmoothingProblem) -> int: ...

    # Pure once prepared; safe to call from several worker threads.
    def posterior(self, data: np.ndarray, r: int) -> PosteriorApprox: ...

    def bounds(self, r: int) -> Optional[BoundReport]:
        """Error bounds at rank r, for reducers that have them."""
        return None
