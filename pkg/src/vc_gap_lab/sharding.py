"""Round-robin sharding of census loops and deterministic merging of shard results."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, TypeVar

from vc_gap_lab.errors import LabError

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable, Sequence

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass(frozen=True)
class ShardSpec:
    """Shard ``index`` of ``count``: items whose position is ``index`` mod ``count``."""

    index: int = 0
    count: int = 1

    def __post_init__(self) -> None:
        if self.count < 1 or not 0 <= self.index < self.count:
            raise LabError(f"invalid shard {self.index}/{self.count}")

    @classmethod
    def parse(cls, text: str) -> ShardSpec:
        """Parse ``"i/k"``."""
        try:
            index, count = (int(part) for part in text.split("/"))
        except ValueError:
            raise LabError(f"shard must look like 'i/k', got {text!r}") from None
        return cls(index, count)

    def __str__(self) -> str:
        return f"{self.index}/{self.count}"


def shard_slice(items: Iterable[T], shard: ShardSpec) -> Iterable[T]:
    """Items of ``shard`` in their original order."""
    return (item for position, item in enumerate(items) if position % shard.count == shard.index)


def run_sharded(
    func: Callable[[int, int], T], shard_count: int, workers: int = 1
) -> list[T]:
    """Run ``func(index, shard_count)`` for every shard, in shard order.

    With more than one worker the shards run in a process pool; ``func`` must
    then be picklable. Results never depend on the worker count.
    """
    if shard_count < 1:
        raise LabError("shard count must be positive")
    indices = range(shard_count)
    if workers <= 1 or shard_count == 1:
        return [func(i, shard_count) for i in indices]
    logger.debug("running %d shards on %d workers", shard_count, workers)
    with ProcessPoolExecutor(max_workers=min(workers, shard_count)) as pool:
        return list(pool.map(func, indices, [shard_count] * shard_count))


def merge_min(results: Sequence[T], key: Callable[[T], Any]) -> T:
    """Smallest result by ``key``; the earliest shard wins ties."""
    if not results:
        raise LabError("nothing to merge")
    best = results[0]
    for result in results[1:]:
        if key(result) < key(best):
            best = result
    return best


def merge_records(parts: Iterable[Iterable[T]], key: Callable[[T], Any]) -> list[T]:
    """Concatenate shard record lists and sort by descriptor."""
    return sorted((record for part in parts for record in part), key=key)
