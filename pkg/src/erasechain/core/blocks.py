"""Block headers, merkle commitments, and proof-of-work assembly."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from . import codec
from .hashing import HASH_SIZE, MERKLE_LEAF_TAG, MERKLE_NODE_TAG, sha256
from .tx import Transaction

HEADER_SIZE = 2 * HASH_SIZE + 16


class NonceSpaceExhausted(Exception):
    """No nonce in [0, 2^64) satisfied the difficulty target."""


@dataclass(frozen=True)
class BlockHeader:
    prev_block_hash: bytes
    merkle_root: bytes
    time: int
    nonce: int

    def encode(self) -> bytes:
        return self.prev_block_hash + self.merkle_root + codec.u64(self.time) + codec.u64(self.nonce)

    @classmethod
    def read(cls, r: codec.ByteReader) -> "BlockHeader":
        return cls(r.read(HASH_SIZE), r.read(HASH_SIZE), r.u64(), r.u64())

    @classmethod
    def decode(cls, raw: bytes) -> "BlockHeader":
        r = codec.ByteReader(raw)
        header = cls.read(r)
        r.expect_end()
        return header

    @cached_property
    def block_hash(self) -> bytes:
        return sha256(self.encode())


@dataclass(frozen=True)
class Block:
    header: BlockHeader
    transactions: tuple[Transaction, ...]

    @property
    def block_hash(self) -> bytes:
        return self.header.block_hash

    def encode(self) -> bytes:
        chunks = [self.header.encode(), codec.u32(len(self.transactions))]
        for tx in self.transactions:
            raw = tx.encode()
            chunks.append(codec.u32(len(raw)))
            chunks.append(raw)
        return b"".join(chunks)

    @classmethod
    def read(cls, r: codec.ByteReader) -> "Block":
        header = BlockHeader.read(r)
        txs = []
        for _ in range(r.u32()):
            raw = r.read(r.u32())
            txs.append(Transaction.decode(raw))
        return cls(header, tuple(txs))

    @classmethod
    def decode(cls, raw: bytes) -> "Block":
        r = codec.ByteReader(raw)
        block = cls.read(r)
        r.expect_end()
        return block


def compute_merkle_root(txids: Sequence[bytes]) -> bytes:
    """Tagged-sha256 merkle root; odd levels duplicate their last node."""
    if not txids:
        raise ValueError("merkle root of an empty transaction list")
    level = [sha256(MERKLE_LEAF_TAG + txid) for txid in txids]
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        level = [
            sha256(MERKLE_NODE_TAG + level[i] + level[i + 1])
            for i in range(0, len(level), 2)
        ]
    return level[0]


def merkle_branch(txids: Sequence[bytes], index: int) -> list[tuple[bytes, bool]]:
    """Sibling path for ``txids[index]``; each entry is (digest, sibling_is_right)."""
    if not 0 <= index < len(txids):
        raise IndexError(index)
    level = [sha256(MERKLE_LEAF_TAG + txid) for txid in txids]
    branch: list[tuple[bytes, bool]] = []
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        sibling = index ^ 1
        branch.append((level[sibling], sibling > index))
        level = [
            sha256(MERKLE_NODE_TAG + level[i] + level[i + 1])
            for i in range(0, len(level), 2)
        ]
        index //= 2
    return branch


def verify_merkle_branch(txid: bytes, branch: Iterable[tuple[bytes, bool]], root: bytes) -> bool:
    node = sha256(MERKLE_LEAF_TAG + txid)
    for digest, sibling_is_right in branch:
        if sibling_is_right:
            node = sha256(MERKLE_NODE_TAG + node + digest)
        else:
            node = sha256(MERKLE_NODE_TAG + digest + node)
    return node == root


def meets_difficulty(block_hash: bytes, difficulty: int) -> bool:
    """True iff the hash has at least ``difficulty`` leading zero bits."""
    if difficulty <= 0:
        return True
    return int.from_bytes(block_hash, "big") >> (256 - difficulty) == 0


def mine_block(
    prev_block_hash: bytes,
    transactions: Sequence[Transaction],
    difficulty: int,
    time: int,
) -> Block:
    """Search nonces from zero until the header hash meets the target.

    The first transaction must be a coinbase.  Deterministic: the same
    inputs always yield the same block.
    """
    txs = tuple(transactions)
    if not txs or not txs[0].is_coinbase():
        raise ValueError("first transaction must be a coinbase")
    merkle_root = compute_merkle_root([tx.txid for tx in txs])
    prefix = prev_block_hash + merkle_root + codec.u64(time)
    for nonce in range(2**64):
        if meets_difficulty(sha256(prefix + codec.u64(nonce)), difficulty):
            return Block(BlockHeader(prev_block_hash, merkle_root, time, nonce), txs)
    raise NonceSpaceExhausted(f"difficulty {difficulty}")
