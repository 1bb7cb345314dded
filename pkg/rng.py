"""Deterministic seeding: every randomized routine takes its own random.Random."""

import hashlib
import random
from typing import Union


def derive_seed(master: int, tag: Union[int, str]) -> int:
    """Child seed for a named substream; identical on every platform."""
    digest = hashlib.sha256(f"{master}:{tag}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], byteorder="big")


def make_rng(seed: int) -> random.Random:
    return random.Random(seed)


def split(rng: random.Random) -> random.Random:
    """Fresh independent generator drawn from an existing one."""
    return random.Random(rng.getrandbits(64))
