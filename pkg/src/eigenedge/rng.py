"""Counter-based random streams.

Every random quantity in the library is drawn from a Philox generator whose
128-bit key is a hash of a tuple of identifiers, e.g.
``(base_seed, "sbm-edgeworth", replicate)``.  Philox is counter-based, so the
values of a stream depend only on its key and on the position of the draw,
never on which thread produced it or in what order replicates ran.
"""
from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["hash64", "hash128", "stream", "as_generator", "replicate_seed", "boot_seed"]


def _digest(parts, size: int) -> int:
    h = hashlib.blake2b(digest_size=size, person=b"eigenedge")
    for part in parts:
        if isinstance(part, (bool, np.bool_)):
            raise TypeError("booleans are not valid stream identifiers")
        if isinstance(part, (int, np.integer)):
            tag, payload = b"i", str(int(part)).encode()
        elif isinstance(part, str):
            tag, payload = b"s", part.encode("utf-8")
        else:
            raise TypeError(f"unsupported stream identifier {part!r}")
        h.update(tag + len(payload).to_bytes(4, "little") + payload)
    return int.from_bytes(h.digest(), "little")


def hash64(*parts: int | str) -> int:
    """Stable 64-bit hash of a tuple of ints and strings."""
    return _digest(parts, 8)


def hash128(*parts: int | str) -> int:
    return _digest(parts, 16)


def stream(*parts: int | str) -> np.random.Generator:
    """Independent generator keyed by ``parts``."""
    return np.random.Generator(np.random.Philox(key=hash128(*parts)))


def as_generator(seed) -> np.random.Generator:
    """Accept an int seed or an existing generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (int, np.integer)) and not isinstance(seed, bool):
        return stream(int(seed))
    raise TypeError(f"seed must be an int or numpy Generator, got {type(seed).__name__}")


def replicate_seed(base_seed: int, experiment: str, index: int) -> int:
    return hash64(base_seed, experiment, index)


def boot_seed(rep_seed: int, index: int) -> int:
    return hash64(rep_seed, "boot", index)
