"""
Counter-based random streams.

Every Gaussian shock in the lab is addressed by (master_seed, stream_id,
shock, period, agent). The pair (master_seed, stream_id) is hashed into a
Philox key through numpy's SeedSequence; shock type, period and agent block
go into the Philox counter. A draw therefore never depends on how many other
draws were made before it, which is what keeps panels and sweeps identical
across thread counts.
"""

from concurrent.futures import Executor
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from disequilibrium.core.errors import DomainError

# Agents per counter block; draws for agent i live in block i // AGENT_BLOCK
AGENT_BLOCK = 8192


class Shock(IntEnum):
    FUNDAMENTAL = 0
    SIGNAL = 1
    BEHAVIORAL = 2
    INITIAL = 3


class SeedSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    master_seed: int = Field(default=42, ge=0, lt=2**64)
    stream_id: int = Field(default=0, ge=0)

    def stream(self, stream_id: int) -> "SeedSpec":
        return SeedSpec(master_seed=self.master_seed, stream_id=stream_id)


@lru_cache(maxsize=4096)
def _philox_key(master_seed: int, stream_id: int) -> Tuple[int, int]:
    words = np.random.SeedSequence(master_seed, spawn_key=(stream_id,)).generate_state(2, dtype=np.uint64)
    return int(words[0]), int(words[1])


def block_generator(seed: SeedSpec, shock: Shock, period: int, block: int) -> np.random.Generator:
    """Generator positioned at the start of one (shock, period, block) cell."""
    if period < 0 or block < 0:
        raise DomainError("period", "draw addresses must be non-negative")
    key = np.array(_philox_key(seed.master_seed, seed.stream_id), dtype=np.uint64)
    counter = np.array([0, block, period, int(shock)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def draw_normals(
    seed: SeedSpec,
    shock: Shock,
    period: int,
    n: int,
    executor: Optional[Executor] = None,
) -> np.ndarray:
    """Standard normals for agents 0..n-1; agent i's value depends only on its address."""

    def _block(start: int) -> np.ndarray:
        size = min(AGENT_BLOCK, n - start)
        return block_generator(seed, shock, period, start // AGENT_BLOCK).standard_normal(size)

    starts = range(0, n, AGENT_BLOCK)
    if executor is None:
        parts = [_block(start) for start in starts]
    else:
        parts = list(executor.map(_block, starts))
    if not parts:
        return np.empty(0, dtype=np.float64)
    return np.concatenate(parts)


@dataclass(frozen=True, eq=False)
class RngState:
    """Opaque, immutable snapshot of a Philox generator."""

    bit_state: Dict[str, Any]

    @classmethod
    def at(cls, seed: SeedSpec, shock: Shock = Shock.FUNDAMENTAL, period: int = 0, block: int = 0) -> "RngState":
        return cls(block_generator(seed, shock, period, block).bit_generator.state)

    def generator(self) -> np.random.Generator:
        bit_gen = np.random.Philox(0)
        bit_gen.state = self.bit_state
        return np.random.Generator(bit_gen)


def gaussian_draw(
    state: RngState,
    mean: float,
    std: float,
    size: Optional[int] = None,
) -> Tuple[Union[float, np.ndarray], RngState]:
    """
    Draw from N(mean, std**2) and return the value with the advanced state.

    A zero `std` returns `mean` exactly but still consumes the draw, so the
    stream position never depends on the parameter values.
    """
    if not std >= 0:
        raise DomainError("std", f"standard deviation must be >= 0, got {std}")

    gen = state.generator()
    z = gen.standard_normal(size)
    if std == 0:
        value = float(mean) if size is None else np.full(size, float(mean))
    else:
        value = mean + std * z
        if size is None:
            value = float(value)
    return value, RngState(gen.bit_generator.state)
