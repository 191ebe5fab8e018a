"""Deterministic seed fan-out.

A single master seed expands into independent per-stage, per-run seeds
through ``numpy.random.SeedSequence`` with a spawn key derived from the
stage name and a run counter. Two pipelines with the same master seed
therefore agree stage by stage, regardless of execution order.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["derive_seed"]


def derive_seed(master: int, stage: str, index: int = 0) -> int:
    """Seed for (stage, index) under the given master seed."""
    stage_key = zlib.crc32(stage.encode("utf-8"))
    seq = np.random.SeedSequence(entropy=master, spawn_key=(stage_key, index))
    return int(seq.generate_state(1)[0])
