"""Digest primitives shared by every chain structure."""

from __future__ import annotations

import hashlib

HASH_SIZE = 32
ZERO_HASH = b"\x00" * HASH_SIZE

# Domain tags keep leaf digests distinct from interior-node digests in the
# merkle tree, so a 64-byte leaf can never be reinterpreted as two children.
MERKLE_LEAF_TAG = b"\x00"
MERKLE_NODE_TAG = b"\x01"


def sha256(data: bytes) -> bytes:
    """The chain's one digest function, 32 raw bytes."""
    return hashlib.sha256(data).digest()


def hash_from_hex(text: str) -> bytes:
    digest = bytes.fromhex(text)
    if len(digest) != HASH_SIZE:
        raise ValueError(f"expected {HASH_SIZE}-byte digest, got {len(digest)} bytes")
    return digest
