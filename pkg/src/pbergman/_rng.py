"""Seed-derived random substreams.

Every stochastic routine draws from a generator keyed by (seed, tag, index...)
so that chunked work gives identical results for any worker count, and two
calls with the same inputs replay byte-identically.
"""

from __future__ import annotations

import json
import zlib

import numpy as np

# Tag namespace for substream keys; one per sampling site.
TAG_REJECTION = 101
TAG_WEIGHTED = 102
TAG_PUSHFORWARD = 103
TAG_MC_NORM = 104
TAG_DIRECTIONS = 105
TAG_PROBE = 106
TAG_STARTS = 107
TAG_BATTERY = 108
TAG_BOXES = 109
TAG_OPTIMIZER = 110


def substream(seed: int, *key) -> np.random.Generator:
    """Generator for the substream addressed by ``key`` under ``seed``.

    Key parts are integers; strings are folded to integers via stable_key.
    """
    parts = tuple(int(k) if not isinstance(k, str) else stable_key(k) for k in key)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=parts))


def stable_key(obj) -> int:
    """Deterministic 32-bit key for a JSON-serialisable descriptor.

    Used to derive substreams from structural descriptions (domain spec,
    weight function) so that identical computations replay identical draws.
    """
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return zlib.crc32(text.encode("utf-8"))
