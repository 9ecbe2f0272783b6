"""Persistent node state: chainstate, block records, undo data, datadir.

Every store keeps its working copy in memory and round-trips through an
explicit byte encoding, so a node can run entirely in memory (simulations)
or flush to a datadir (CLI).  File writes go through a temp file and
rename, never a partial overwrite.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .core import codec
from .core.blocks import HEADER_SIZE, Block, BlockHeader
from .core.hashing import HASH_SIZE
from .core.tx import OutPoint, TxOutput

BLOCKS_MAGIC = b"EBLK"
UNDO_MAGIC = b"EUND"
CHAINSTATE_MAGIC = b"EUTX"
CHAINFILE_MAGIC = b"ECHN"


class StorageError(Exception):
    pass


class LockHeld(StorageError):
    """Another process owns the datadir."""


# Chainstate.


@dataclass(frozen=True)
class UtxoEntry:
    """One unspent output plus the context needed to validate a spend."""

    output: TxOutput
    height: int
    is_coinbase: bool

    def encode(self) -> bytes:
        return self.output.encode() + codec.u32(self.height) + bytes([self.is_coinbase])

    @classmethod
    def read(cls, r: codec.ByteReader) -> "UtxoEntry":
        output = TxOutput.read(r)
        height = r.u32()
        flag = r.read(1)[0]
        return cls(output, height, bool(flag))


class UtxoSet:
    """Map of outpoint to unspent entry: the spendable state of one chain tip."""

    def __init__(self, entries: dict[OutPoint, UtxoEntry] | None = None):
        self._entries: dict[OutPoint, UtxoEntry] = dict(entries) if entries else {}

    def get(self, outpoint: OutPoint) -> UtxoEntry | None:
        return self._entries.get(outpoint)

    def add(self, outpoint: OutPoint, entry: UtxoEntry) -> None:
        self._entries[outpoint] = entry

    def remove(self, outpoint: OutPoint) -> UtxoEntry:
        return self._entries.pop(outpoint)

    def replace(self, outpoint: OutPoint, entry: UtxoEntry) -> None:
        if outpoint not in self._entries:
            raise KeyError(outpoint)
        self._entries[outpoint] = entry

    def __contains__(self, outpoint: OutPoint) -> bool:
        return outpoint in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[OutPoint]:
        return iter(self._entries)

    def items(self) -> Iterable[tuple[OutPoint, UtxoEntry]]:
        return self._entries.items()

    def copy(self) -> "UtxoSet":
        return UtxoSet(self._entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UtxoSet):
            return NotImplemented
        return self._entries == other._entries

    def total_value(self) -> int:
        return sum(entry.output.value for entry in self._entries.values())

    def encode(self) -> bytes:
        """Canonical bytes: entries sorted by outpoint, so equal sets encode equal."""
        chunks = [codec.u32(len(self._entries))]
        for outpoint in sorted(self._entries, key=lambda o: (o.txid, o.index)):
            chunks.append(outpoint.encode())
            chunks.append(self._entries[outpoint].encode())
        return b"".join(chunks)

    @classmethod
    def decode(cls, raw: bytes) -> "UtxoSet":
        r = codec.ByteReader(raw)
        entries = {}
        for _ in range(r.u32()):
            outpoint = OutPoint.read(r)
            entries[outpoint] = UtxoEntry.read(r)
        r.expect_end()
        return cls(entries)


# Undo data.


@dataclass
class UndoData:
    """Everything needed to disconnect one block from the chainstate.

    ``spent`` carries full entries (they are gone from the set); ``created``
    needs only the keys, since redo goes through the stored block.
    """

    spent: tuple[tuple[OutPoint, UtxoEntry], ...]
    created: tuple[OutPoint, ...]

    def encode(self) -> bytes:
        chunks = [codec.u32(len(self.spent))]
        for outpoint, entry in self.spent:
            chunks.append(outpoint.encode())
            chunks.append(entry.encode())
        chunks.append(codec.u32(len(self.created)))
        chunks += [outpoint.encode() for outpoint in self.created]
        return b"".join(chunks)

    @classmethod
    def read(cls, r: codec.ByteReader) -> "UndoData":
        spent = tuple((OutPoint.read(r), UtxoEntry.read(r)) for _ in range(r.u32()))
        created = tuple(OutPoint.read(r) for _ in range(r.u32()))
        return cls(spent, created)


class UndoStore:
    def __init__(self):
        self._by_block: dict[bytes, UndoData] = {}

    def put(self, block_hash: bytes, undo: UndoData) -> None:
        self._by_block[block_hash] = undo

    def get(self, block_hash: bytes) -> UndoData | None:
        return self._by_block.get(block_hash)

    def items(self) -> Iterable[tuple[bytes, UndoData]]:
        return self._by_block.items()

    def replace(self, block_hash: bytes, undo: UndoData) -> None:
        self._by_block[block_hash] = undo

    def encode(self) -> bytes:
        chunks = [UNDO_MAGIC, codec.u32(len(self._by_block))]
        for block_hash, undo in self._by_block.items():
            raw = undo.encode()
            chunks.append(block_hash)
            chunks.append(codec.u32(len(raw)))
            chunks.append(raw)
        return b"".join(chunks)

    @classmethod
    def decode(cls, raw: bytes) -> "UndoStore":
        r = codec.ByteReader(raw)
        if r.read(4) != UNDO_MAGIC:
            raise codec.DecodeError("bad undo store magic")
        store = cls()
        for _ in range(r.u32()):
            block_hash = r.read(HASH_SIZE)
            undo = UndoData.read(codec.ByteReader(r.read(r.u32())))
            store._by_block[block_hash] = undo
        r.expect_end()
        return store


# Block records.


@dataclass
class BlockRecord:
    """A stored block plus bookkeeping the raw encoding cannot carry.

    ``substitutions`` lists (tx_index, original_txid) pairs for transactions
    stored in redacted form; their stored bytes no longer hash to the txid
    the block's merkle root commits to.  ``body`` is None once pruned.
    """

    block_hash: bytes
    height: int
    header: BlockHeader
    body: Block | None
    substitutions: tuple[tuple[int, bytes], ...] = ()

    def resolved_txids(self) -> list[bytes] | None:
        """Original txids in block order, honoring substitutions; None if pruned."""
        if self.body is None:
            return None
        subs = dict(self.substitutions)
        return [subs.get(i, tx.txid) for i, tx in enumerate(self.body.transactions)]

    def encode(self) -> bytes:
        flags = 1 if self.body is not None else 0
        chunks = [
            self.block_hash,
            codec.u32(self.height),
            self.header.encode(),
            bytes([flags]),
            codec.u16(len(self.substitutions)),
        ]
        for tx_index, original_txid in self.substitutions:
            chunks.append(codec.u32(tx_index))
            chunks.append(original_txid)
        if self.body is not None:
            raw = self.body.encode()
            chunks.append(codec.u32(len(raw)))
            chunks.append(raw)
        return b"".join(chunks)

    @classmethod
    def read(cls, r: codec.ByteReader) -> "BlockRecord":
        block_hash = r.read(HASH_SIZE)
        height = r.u32()
        header = BlockHeader.read(codec.ByteReader(r.read(HEADER_SIZE)))
        flags = r.read(1)[0]
        subs = tuple((r.u32(), r.read(HASH_SIZE)) for _ in range(r.u16()))
        body = None
        if flags & 1:
            body = Block.decode(r.read(r.u32()))
        return cls(block_hash, height, header, body, subs)


class BlockStore:
    """Every block this node has kept, active chain or not, by hash."""

    def __init__(self):
        self._records: dict[bytes, BlockRecord] = {}

    def put(self, record: BlockRecord) -> None:
        self._records[record.block_hash] = record

    def get(self, block_hash: bytes) -> BlockRecord | None:
        return self._records.get(block_hash)

    def __contains__(self, block_hash: bytes) -> bool:
        return block_hash in self._records

    def __len__(self) -> int:
        return len(self._records)

    def records(self) -> Iterable[BlockRecord]:
        return self._records.values()

    def encode(self) -> bytes:
        chunks = [BLOCKS_MAGIC, codec.u32(len(self._records))]
        for record in self._records.values():
            raw = record.encode()
            chunks.append(codec.u32(len(raw)))
            chunks.append(raw)
        return b"".join(chunks)

    @classmethod
    def decode(cls, raw: bytes) -> "BlockStore":
        r = codec.ByteReader(raw)
        if r.read(4) != BLOCKS_MAGIC:
            raise codec.DecodeError("bad block store magic")
        store = cls()
        for _ in range(r.u32()):
            rec = BlockRecord.read(codec.ByteReader(r.read(r.u32())))
            store._records[rec.block_hash] = rec
        r.expect_end()
        return store


def prune_block_bodies(store: BlockStore, tip_height: int, maturity: int) -> int:
    """Drop raw bodies buried at least ``maturity`` blocks below the tip.

    Headers, heights and substitution metadata survive.  Returns the number
    of bodies dropped.
    """
    cutoff = tip_height - maturity
    dropped = 0
    for record in store.records():
        if record.body is not None and record.height <= cutoff:
            record.body = None
            dropped += 1
    return dropped


# Chain files: a portable sequence of raw blocks, genesis first.


def encode_chain(blocks: Iterable[Block]) -> bytes:
    chunks = [CHAINFILE_MAGIC]
    for block in blocks:
        raw = block.encode()
        chunks.append(codec.u32(len(raw)))
        chunks.append(raw)
    return b"".join(chunks)


def decode_chain(raw: bytes) -> list[Block]:
    r = codec.ByteReader(raw)
    if r.read(4) != CHAINFILE_MAGIC:
        raise codec.DecodeError("bad chain file magic")
    blocks = []
    while r.remaining():
        blocks.append(Block.decode(r.read(r.u32())))
    return blocks


# Datadir layout.


@dataclass(frozen=True)
class DataDir:
    """Fixed on-disk layout of one node's persistent state."""

    root: str

    @property
    def blocks_path(self) -> str:
        return os.path.join(self.root, "blocks", "blocks.dat")

    @property
    def undo_path(self) -> str:
        return os.path.join(self.root, "blocks", "undo.dat")

    @property
    def chainstate_path(self) -> str:
        return os.path.join(self.root, "chainstate", "utxo.dat")

    @property
    def erasure_path(self) -> str:
        return os.path.join(self.root, "erasure.db")

    @property
    def params_path(self) -> str:
        return os.path.join(self.root, "params.json")

    @property
    def lock_path(self) -> str:
        return os.path.join(self.root, "node.lock")

    @property
    def events_path(self) -> str:
        return os.path.join(self.root, "events.log")

    def initialized(self) -> bool:
        return os.path.exists(self.blocks_path)

    def ensure_layout(self) -> None:
        os.makedirs(os.path.join(self.root, "blocks"), exist_ok=True)
        os.makedirs(os.path.join(self.root, "chainstate"), exist_ok=True)

    def all_files(self) -> list[str]:
        """Every persisted file that currently exists under this datadir."""
        found = []
        for dirpath, _dirnames, filenames in os.walk(self.root):
            for name in filenames:
                found.append(os.path.join(dirpath, name))
        return sorted(found)


def write_file(path: str, data: bytes) -> None:
    """Atomic-enough write: temp file in the same directory, then rename."""
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


class DirLock:
    """Advisory single-owner lock on a datadir, via an O_EXCL lock file."""

    def __init__(self, datadir: DataDir):
        self.path = datadir.lock_path
        self._fd: int | None = None

    def acquire(self) -> None:
        os.makedirs(os.path.dirname(self.path), exist_ok=True)
        try:
            self._fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise LockHeld(f"lock file exists: {self.path}") from None
        os.write(self._fd, str(os.getpid()).encode())

    def release(self) -> None:
        if self._fd is not None:
            os.close(self._fd)
            self._fd = None
            try:
                os.remove(self.path)
            except FileNotFoundError:
                pass

    def __enter__(self) -> "DirLock":
        self.acquire()
        return self

    def __exit__(self, *exc) -> None:
        self.release()
