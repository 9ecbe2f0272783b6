"""Ed25519 keypairs and the default CHECKSIG verifier.

The signature scheme is deliberately behind one function and one class so
a different deterministic scheme could be swapped in without touching the
script machine.
"""

from __future__ import annotations

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric import ed25519

from .hashing import sha256


class KeyPair:
    """Signing key derived from a 32-byte seed.  Signatures are deterministic."""

    def __init__(self, seed: bytes):
        if len(seed) != 32:
            raise ValueError("seed must be exactly 32 bytes")
        self._key = ed25519.Ed25519PrivateKey.from_private_bytes(seed)
        self.pubkey: bytes = self._key.public_key().public_bytes_raw()

    @classmethod
    def from_int(cls, n: int) -> "KeyPair":
        return cls(sha256(b"key:" + n.to_bytes(8, "little")))

    @property
    def pubkey_hash(self) -> bytes:
        return sha256(self.pubkey)

    def sign(self, message: bytes) -> bytes:
        return self._key.sign(message)


def verify_signature(signature: bytes, pubkey: bytes, message: bytes) -> bool:
    """True iff ``signature`` is valid for ``message`` under ``pubkey``.

    Garbage of any shape (wrong lengths, non-curve points) is False.
    """
    try:
        key = ed25519.Ed25519PublicKey.from_public_bytes(pubkey)
        key.verify(signature, message)
        return True
    except (InvalidSignature, ValueError, TypeError):
        return False
