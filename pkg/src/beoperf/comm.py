"""In-process message passing: one thread per rank, deterministic collectives.

Stands in for the MPI layer a physical cluster would use, so the kernels
run unchanged at any rank count on one machine. Collectives are slot
exchanges around one reusable barrier: every rank deposits its
contribution, waits, then computes the combined result locally in
ascending rank order. That makes results bit-identical across ranks,
schedules and repeated runs. A second wait keeps the slots quiescent
until every rank has read them, so back-to-back collectives cannot race.

A rank that raises aborts the shared barrier; peers blocked in a
collective unwind with BrokenBarrierError and spawn_ranks reports the
originating rank.
"""

from __future__ import annotations

import threading
from functools import reduce
from typing import Callable, Sequence

import numpy as np


class RankFailure(RuntimeError):
    """A rank program raised; `rank` identifies the culprit."""

    def __init__(self, rank: int, cause: BaseException):
        super().__init__(f"rank {rank} failed: {cause!r}")
        self.rank = rank
        self.cause = cause


class _Shared:
    def __init__(self, size: int):
        self.size = size
        self.barrier = threading.Barrier(size)
        self.slots: list = [None] * size


class Communicator:
    """Handle held by one rank of a fixed-size team."""

    def __init__(self, rank: int, size: int, shared: _Shared):
        self.rank = rank
        self.size = size
        self._shared = shared

    def barrier(self) -> None:
        """Block until every rank has entered."""
        self._shared.barrier.wait()

    def all_reduce_sum(self, local) -> np.ndarray:
        """Element-wise sum over ranks, accumulated in ascending rank order.

        All ranks must contribute arrays of the same shape; every rank gets
        the same (bit-identical) result.
        """
        arr = np.asarray(local)
        self._shared.slots[self.rank] = arr
        self._shared.barrier.wait()
        slots = self._shared.slots
        shapes = {s.shape for s in slots}
        if len(shapes) != 1:
            self._shared.barrier.wait()  # keep wait counts matched before raising
            raise ValueError(f"all_reduce_sum shape mismatch across ranks: {sorted(shapes)}")
        total = reduce(np.add, slots)
        self._shared.barrier.wait()
        return total

    def all_to_all(self, blocks: Sequence) -> list[np.ndarray]:
        """Exchange one block with every rank; output block j came from rank j.

        Requires exactly `size` equal-shaped blocks per rank. Received blocks
        are copies, so callers may mutate them freely.
        """
        if len(blocks) != self.size:
            self._shared.slots[self.rank] = None
            # Still participate in both phases so well-behaved ranks do not hang.
            self._shared.barrier.wait()
            self._shared.barrier.wait()
            raise ValueError(f"all_to_all needs {self.size} blocks, got {len(blocks)}")
        mine = [np.asarray(b) for b in blocks]
        self._shared.slots[self.rank] = mine
        self._shared.barrier.wait()
        slots = self._shared.slots
        bad = any(s is None for s in slots)
        shapes = {b.shape for s in slots if s is not None for b in s}
        if bad or len(shapes) != 1:
            self._shared.barrier.wait()
            raise ValueError(f"all_to_all block shape mismatch across ranks: {sorted(shapes)}")
        received = [np.array(slots[j][self.rank]) for j in range(self.size)]
        self._shared.barrier.wait()
        return received


def spawn_ranks(p: int, entry: Callable[[Communicator], object]) -> list:
    """Run `entry(comm)` concurrently on p ranks; return results by rank.

    Any rank's exception aborts the whole job and is re-raised as a
    RankFailure naming that rank; secondary broken-barrier errors on the
    other ranks are suppressed.
    """
    if p < 1:
        raise ValueError("rank count must be >= 1")
    shared = _Shared(p)
    results: list = [None] * p
    errors: dict[int, BaseException] = {}

    def runner(rank: int) -> None:
        try:
            results[rank] = entry(Communicator(rank, p, shared))
        except BaseException as exc:  # noqa: BLE001 - must not leave peers hanging
            errors[rank] = exc
            shared.barrier.abort()

    threads = [threading.Thread(target=runner, args=(r,), name=f"rank-{r}") for r in range(p)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    if errors:
        primary = {r: e for r, e in errors.items()
                   if not isinstance(e, threading.BrokenBarrierError)}
        pick = min(primary) if primary else min(errors)
        raise RankFailure(pick, errors[pick]) from errors[pick]
    return results
