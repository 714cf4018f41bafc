"""Stable seed derivation.

Seeds are derived by hashing the master seed together with string labels, so a
stage or segment gets the same stream regardless of processing order.
"""
import hashlib


def derive_seed(master_seed: int, *parts) -> int:
    """63-bit seed from ``master_seed`` and any printable labels."""
    text = "\x1f".join([str(int(master_seed))] + [str(p) for p in parts])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") >> 1
