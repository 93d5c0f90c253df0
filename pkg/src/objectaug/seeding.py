"""Deterministic seed derivation.

Child seeds are derived by folding each part (integers directly, strings via
an 8-byte blake2b digest) into a running 64-bit state through the splitmix64
avalanche mixer.  The scheme is documented so that reproductions outside this
package can derive identical per-object streams; it does not depend on
iteration order or thread scheduling.
"""

import hashlib

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 avalanche step on a 64-bit state."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def stable_text_hash(text: str) -> int:
    """64-bit digest of a string, stable across processes and platforms."""
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def child_seed(*parts: int | str) -> int:
    """Mix integers and strings into a single 64-bit seed."""
    state = 0
    for part in parts:
        if isinstance(part, str):
            part = stable_text_hash(part)
        state = splitmix64(state ^ (int(part) & _MASK64))
    return state
