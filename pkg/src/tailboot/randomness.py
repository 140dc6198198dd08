"""Reproducible, splittable uniform streams.

Every stream is addressed by a master seed plus a path of non-negative
integers, e.g. ``[run_index]`` for the data of one experiment and
``[run_index, replicate_index]`` for one bootstrap resample. The path is
hashed into a Philox key by :class:`numpy.random.SeedSequence`, so stream
derivation is O(1) and independent of the order in which work is scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

UniformSource = np.random.Generator

_U64 = 2**64


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    stream_path: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < _U64:
            raise ValueError(f"master_seed must fit in 64 unsigned bits, got {self.master_seed}")
        path = tuple(int(i) for i in self.stream_path)
        if any(i < 0 for i in path):
            raise ValueError(f"stream_path entries must be non-negative, got {path}")
        object.__setattr__(self, "master_seed", int(self.master_seed))
        object.__setattr__(self, "stream_path", path)

    def child(self, *indices: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, self.stream_path + tuple(indices))


def derive_stream(seed: SeedSpec | int, path: Sequence[int] = ()) -> UniformSource:
    """Return a Philox-backed generator fully determined by ``seed``.

    ``derive_stream(SeedSpec(42, (3, 7)))`` and ``derive_stream(42, (3, 7))``
    are the same stream. Draw uniforms on [0, 1) with ``.random(size)``.
    """
    if not isinstance(seed, SeedSpec):
        seed = SeedSpec(seed, tuple(path))
    elif path:
        seed = seed.child(*path)
    ss = np.random.SeedSequence(seed.master_seed, spawn_key=seed.stream_path)
    return np.random.Generator(np.random.Philox(ss))
