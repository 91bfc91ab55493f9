"""Deterministic derivation of named sub-seeds from one master seed."""

import hashlib


def derive_seed(master: int, *labels) -> int:
    """Map (master, *labels) to a stable 63-bit integer seed.

    Every randomized stage of a run (resampling, fold assignment, each
    fold's network training) draws its own seed through this function, so
    a single master seed pins the whole run while stages stay decoupled:
    adding a draw to one stage never shifts another stage's stream.
    """
    key = repr((int(master),) + tuple(labels)).encode("utf-8")
    digest = hashlib.sha256(key).digest()
    return int.from_bytes(digest[:8], "big") >> 1
