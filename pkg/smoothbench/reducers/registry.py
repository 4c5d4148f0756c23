# File: smoothbench/reducers/registry.py

from typing import Dict, List, Sequence

from smoothbench.models.belief import SmoothingProblem
from smoothbench.reducers.lis_bt import LisBtReducer
from smoothbench.reducers.olr import OlrReducer
from smoothbench.reducers.pd_bt import PdBtReducer
from smoothbench.reducers.reducer_types import ReducerProtocol


class ReducerRegistry:
    """
    constructor expects any ordered, iterable container of ReducerProtocol items
    """

    def __init__(self, reducers: Sequence[ReducerProtocol]) -> None:
        self.reducers = reducers
        self._reducer_map: Dict[str, ReducerProtocol] = {r.name: r for r in reducers}

    def get(self, name: str) -> ReducerProtocol:
        return self._reducer_map[name]

    def names(self) -> List[str]:
        return list(self._reducer_map.keys())

    def prepare_all(self, problem: SmoothingProblem) -> Dict[str, int]:
        """Prepare every reducer on one problem; returns attainable rank per reducer."""
        return {reducer.name: reducer.prepare(problem) for reducer in self.reducers}


def default_registry(names: Sequence[str] = ("OLR", "LisBT", "PdBT")) -> ReducerRegistry:
    """Fresh reducer instances, in the order the names are given."""
    factories = {"OLR": OlrReducer, "LisBT": LisBtReducer, "PdBT": PdBtReducer}
    unknown = [n for n in names if n not in factories]
    if unknown:
        raise KeyError(f"unknown reducer(s): {', '.join(unknown)}")
    return ReducerRegistry([factories[n]() for n in names])
