"""
Root seed resolution and per-replicate stream splitting.

Every random stream is a child of one root seed: the stream for replicate ``i`` of
experiment ``tag`` is ``SeedSequence(root, spawn_key=(crc32(tag), i))``. Adding
replicates never changes the streams of the earlier ones.
"""
import zlib
from typing import List, Optional

import numpy as np

from src.config import settings
from src.utils.logging import get_logger

logger = get_logger("rng")

DEFAULT_SEED = 0

SeedLike = int | np.random.SeedSequence | np.random.Generator | None


def resolve_seed(seed: Optional[int] = None) -> int:
    """Pick the flag seed, then HARDCORE_LAB_SEED, then the fixed default."""
    if seed is not None:
        return int(seed)
    if settings.seed is not None:
        return int(settings.seed)
    logger.warning("⚠️ No seed supplied, using default", seed=DEFAULT_SEED)
    return DEFAULT_SEED


def seed_sequence(root: int, tag: str, index: int = 0) -> np.random.SeedSequence:
    """Child stream ``index`` of experiment ``tag``."""
    return np.random.SeedSequence(root, spawn_key=(zlib.crc32(tag.encode("utf-8")), index))


def replicate_seeds(root: int, tag: str, count: int) -> List[np.random.SeedSequence]:
    return [seed_sequence(root, tag, i) for i in range(count)]


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Normalize anything seed-like into a PCG64 Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        seed = DEFAULT_SEED
    return np.random.Generator(np.random.PCG64(seed))


def split_rng(seed: SeedLike, count: int) -> List[np.random.Generator]:
    """Independent child generators (e.g. vertex/uniform stream and clock stream)."""
    if isinstance(seed, np.random.Generator):
        children = seed.bit_generator.seed_seq.spawn(count)  # type: ignore[attr-defined]
    elif isinstance(seed, np.random.SeedSequence):
        children = seed.spawn(count)
    else:
        children = np.random.SeedSequence(DEFAULT_SEED if seed is None else seed).spawn(count)
    return [np.random.Generator(np.random.PCG64(child)) for child in children]
