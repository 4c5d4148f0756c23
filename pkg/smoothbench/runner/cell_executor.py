# File: smoothbench/runner/cell_executor.py

import time
from typing import Callable, Generic, Optional, TypeVar

from transitions import Machine
from transitions.core import EventData

from smoothbench.core.errors import SmoothBenchError
from smoothbench.models.result_row import CellStatus
from smoothbench.utils.rich_output import log

T = TypeVar("T")


class CellExecutor(Generic[T]):
    """FSM around one (replicate, method, rank) cell: a failure is recorded, never raised."""

    state: str

    def __init__(self, label: str) -> None:
        NODE_STATES = ["idle", "executing", "success", "failed"]
        self.label = label

        self.machine = Machine(
            model=self,
            states=NODE_STATES,
            initial="idle",
            send_event=True,
            # bind triggers onto the typed stubs declared below
            model_override=True,
        )

        self.result: Optional[T] = None

        # Normal flow
        self.machine.add_transition("start", "idle", "executing")
        self.machine.add_transition("mark_successful", "executing", "success")

        # Failure paths
        self.machine.add_transition("mark_failed", "executing", "failed")
        self.machine.add_transition("reset", ["success", "failed"], "idle")

    def start(self, event: Optional[EventData] = None) -> None: ...
    def mark_successful(self, event: Optional[EventData] = None) -> None: ...
    def mark_failed(self, event: Optional[EventData] = None) -> None: ...
    def reset(self, event: Optional[EventData] = None) -> None: ...

    def execute(self, cell: Callable[[], T]) -> tuple[Optional[T], CellStatus]:
        self.result = None
        self.start()
        t0 = time.perf_counter()
        try:
            self.result = cell()
        except SmoothBenchError as err:
            self.mark_failed()
            elapsed = (time.perf_counter() - t0) * 1000.0
            log("CELL", f"{self.label} failed: {err}")
            return None, CellStatus(
                state="failed", code=err.code, message=str(err), execution_latency_ms=elapsed
            )
        except (ValueError, ArithmeticError) as err:
            self.mark_failed()
            elapsed = (time.perf_counter() - t0) * 1000.0
            log("CELL", f"{self.label} failed: {type(err).__name__}: {err}")
            return None, CellStatus(
                state="failed", code=type(err).__name__, message=str(err), execution_latency_ms=elapsed
            )
        elapsed = (time.perf_counter() - t0) * 1000.0
        self.mark_successful()
        return self.result, CellStatus(state="success", execution_latency_ms=elapsed)
