"""History of evaluated policies, revert-target selection, and on-disk checkpoint files."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .stats import as_samples

CHECKPOINT_MAGIC = b"CTRLZCKP"
CHECKPOINT_FORMAT_VERSION = 1

__all__ = [
    "ParameterVector",
    "Checkpoint",
    "ComparisonVerdict",
    "CheckpointStore",
    "write_checkpoint",
    "read_checkpoint",
]


@dataclass(frozen=True)
class ParameterVector:
    """Flat float64 snapshot of all learner parameters, optionally with optimizer accumulators."""

    values: np.ndarray
    optimizer_state: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if not np.all(np.isfinite(values)):
            raise ValueError("parameter values must be finite")
        object.__setattr__(self, "values", values)
        if self.optimizer_state is not None:
            state = np.asarray(self.optimizer_state, dtype=np.float64).ravel()
            if not np.all(np.isfinite(state)):
                raise ValueError("optimizer state must be finite")
            object.__setattr__(self, "optimizer_state", state)

    def copy(self) -> "ParameterVector":
        return ParameterVector(
            values=self.values.copy(),
            optimizer_state=None if self.optimizer_state is None else self.optimizer_state.copy(),
        )

    def without_optimizer_state(self) -> "ParameterVector":
        return ParameterVector(values=self.values.copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParameterVector):
            return NotImplemented
        if not np.array_equal(self.values, other.values):
            return False
        if (self.optimizer_state is None) != (other.optimizer_state is None):
            return False
        if self.optimizer_state is None:
            return True
        return np.array_equal(self.optimizer_state, other.optimizer_state)


@dataclass(frozen=True)
class Checkpoint:
    id: int
    episode_index: int
    params: ParameterVector
    evaluation: np.ndarray

    @property
    def mean_reward(self) -> float:
        return float(np.mean(self.evaluation))


@dataclass(frozen=True)
class ComparisonVerdict:
    """Per-checkpoint improvement scores and the resulting revert decision.

    `target_id` is set iff `revert` is true; `min_score` is the minimum of
    `scores`.
    """

    scores: tuple  # ((checkpoint id, score), ...)
    min_score: float
    target_id: Optional[int]
    revert: bool


class CheckpointStore:
    """Append-only history of (parameters, evaluation) checkpoints.

    A capacity of k keeps the newest checkpoint plus the k-1 remaining
    checkpoints with the highest mean evaluation reward.  Reverting never
    removes history; restore() returns stored parameters bit-exactly.
    """

    def __init__(self, capacity: Optional[int] = None):
        if capacity is not None and capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._checkpoints: dict[int, Checkpoint] = {}
        self._next_id = 0

    def __len__(self) -> int:
        return len(self._checkpoints)

    @property
    def checkpoints(self) -> list[Checkpoint]:
        return [self._checkpoints[i] for i in sorted(self._checkpoints)]

    def store(self, params: ParameterVector, evaluation, episode_index: int) -> int:
        """Append a checkpoint and return its id (ids count up from 0)."""
        evaluation = as_samples(evaluation).copy()
        ckpt = Checkpoint(
            id=self._next_id,
            episode_index=int(episode_index),
            params=params.copy(),
            evaluation=evaluation,
        )
        self._checkpoints[ckpt.id] = ckpt
        self._next_id += 1
        if self.capacity is not None and len(self._checkpoints) > self.capacity:
            self._evict(newest_id=ckpt.id)
        return ckpt.id

    def _evict(self, newest_id: int):
        # Keep the newest plus the (capacity - 1) best by mean evaluation
        # reward; ties kept in favor of newer checkpoints.
        others = [c for c in self._checkpoints.values() if c.id != newest_id]
        others.sort(key=lambda c: (c.mean_reward, c.id), reverse=True)
        keep = {newest_id} | {c.id for c in others[: self.capacity - 1]}
        self._checkpoints = {i: c for i, c in self._checkpoints.items() if i in keep}

    def judge(
        self,
        current_eval,
        comparator: Callable[[np.ndarray, np.ndarray], float],
        threshold: float,
    ) -> ComparisonVerdict:
        """Score the current evaluation against every stored checkpoint.

        Reverts when the minimum score falls strictly below `threshold`.
        Ties at the minimum resolve to the checkpoint with the highest mean
        evaluation reward, then the lowest id.
        """
        if not self._checkpoints:
            raise RuntimeError("cannot judge against an empty checkpoint store")
        if not (0.0 <= threshold <= 1.0):
            raise ValueError("threshold must be in [0, 1]")
        current_eval = as_samples(current_eval)
        scores = tuple(
            (ckpt.id, float(comparator(current_eval, ckpt.evaluation)))
            for ckpt in self.checkpoints
        )
        min_score = min(s for _, s in scores)
        revert = min_score < threshold
        target_id = None
        if revert:
            tied = [cid for cid, s in scores if s == min_score]
            target_id = min(
                tied, key=lambda cid: (-self._checkpoints[cid].mean_reward, cid)
            )
        return ComparisonVerdict(
            scores=scores, min_score=min_score, target_id=target_id, revert=revert
        )

    def restore(self, target_id: int) -> ParameterVector:
        """Return the stored parameters for `target_id` (the checkpoint stays in the store)."""
        try:
            ckpt = self._checkpoints[target_id]
        except KeyError:
            raise KeyError(f"no checkpoint with id {target_id}") from None
        return ckpt.params.copy()

    def get(self, target_id: int) -> Checkpoint:
        try:
            return self._checkpoints[target_id]
        except KeyError:
            raise KeyError(f"no checkpoint with id {target_id}") from None


_HEADER = struct.Struct("<8sIQQQQ")


def write_checkpoint(path, ckpt: Checkpoint) -> None:
    """Write one checkpoint to a binary file.

    Layout: magic "CTRLZCKP", format version u32, id u64, episode_index u64,
    param count u64, eval count u64, then parameters and evaluation rewards
    as little-endian float64.  Optimizer state is not part of the format.
    """
    params = ckpt.params.values
    evaluation = ckpt.evaluation
    header = _HEADER.pack(
        CHECKPOINT_MAGIC,
        CHECKPOINT_FORMAT_VERSION,
        ckpt.id,
        ckpt.episode_index,
        params.size,
        evaluation.size,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(params.astype("<f8").tobytes())
        fh.write(evaluation.astype("<f8").tobytes())


def read_checkpoint(path) -> Checkpoint:
    """Read a checkpoint written by write_checkpoint."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated checkpoint file")
    magic, version, ckpt_id, episode_index, n_params, n_eval = _HEADER.unpack_from(data)
    if magic != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    expected = _HEADER.size + 8 * (n_params + n_eval)
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, got {len(data)}")
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    params = body[:n_params].astype(np.float64)
    evaluation = body[n_params:].astype(np.float64)
    return Checkpoint(
        id=int(ckpt_id),
        episode_index=int(episode_index),
        params=ParameterVector(values=params),
        evaluation=evaluation,
    )
