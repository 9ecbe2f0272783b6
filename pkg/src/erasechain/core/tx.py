"""Transactions: inputs unlock prior outputs, outputs lock value anew."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from . import codec
from .hashing import HASH_SIZE, ZERO_HASH, sha256
from .script import Script, anyone_can_spend_script, data_carrier_script, pay_to_hash_script

# Marker input index used by coinbase transactions.
COINBASE_INDEX = 0xFFFFFFFF

MAX_VALUE = 2**64 - 1


@dataclass(frozen=True)
class OutPoint:
    """Reference to one output of one transaction."""

    txid: bytes
    index: int

    def encode(self) -> bytes:
        return self.txid + codec.u32(self.index)

    @classmethod
    def read(cls, r: codec.ByteReader) -> "OutPoint":
        return cls(r.read(HASH_SIZE), r.u32())

    def __repr__(self) -> str:
        return f"OutPoint({self.txid.hex()[:12]}..,{self.index})"


@dataclass(frozen=True)
class TxInput:
    prev_txid: bytes
    prev_index: int
    script_sig: Script = Script()

    @property
    def outpoint(self) -> OutPoint:
        return OutPoint(self.prev_txid, self.prev_index)

    def encode(self) -> bytes:
        sig = self.script_sig.encode()
        return self.prev_txid + codec.u32(self.prev_index) + codec.u32(len(sig)) + sig

    @classmethod
    def read(cls, r: codec.ByteReader) -> "TxInput":
        txid = r.read(HASH_SIZE)
        index = r.u32()
        script = Script.decode(r.read(r.u32()))
        return cls(txid, index, script)


@dataclass(frozen=True)
class TxOutput:
    value: int
    script_pubkey: Script

    def __post_init__(self):
        if not 0 <= self.value <= MAX_VALUE:
            raise ValueError(f"output value {self.value} outside [0, 2^64)")

    def encode(self) -> bytes:
        spk = self.script_pubkey.encode()
        return codec.u64(self.value) + codec.u32(len(spk)) + spk

    @classmethod
    def read(cls, r: codec.ByteReader) -> "TxOutput":
        value = r.u64()
        script = Script.decode(r.read(r.u32()))
        return cls(value, script)


@dataclass(frozen=True)
class Transaction:
    inputs: tuple[TxInput, ...]
    outputs: tuple[TxOutput, ...]
    lock_time: int = 0

    def is_coinbase(self) -> bool:
        return (
            len(self.inputs) == 1
            and self.inputs[0].prev_txid == ZERO_HASH
            and self.inputs[0].prev_index == COINBASE_INDEX
        )

    def encode(self) -> bytes:
        chunks = [codec.u32(len(self.inputs))]
        chunks += [txin.encode() for txin in self.inputs]
        chunks.append(codec.u32(len(self.outputs)))
        chunks += [txout.encode() for txout in self.outputs]
        chunks.append(codec.u32(self.lock_time))
        return b"".join(chunks)

    @classmethod
    def read(cls, r: codec.ByteReader) -> "Transaction":
        inputs = tuple(TxInput.read(r) for _ in range(r.u32()))
        outputs = tuple(TxOutput.read(r) for _ in range(r.u32()))
        return cls(inputs, outputs, r.u32())

    @classmethod
    def decode(cls, raw: bytes) -> "Transaction":
        r = codec.ByteReader(raw)
        tx = cls.read(r)
        r.expect_end()
        return tx

    @cached_property
    def txid(self) -> bytes:
        return sha256(self.encode())


def signing_message(tx: Transaction) -> bytes:
    """Digest a spender signs: the transaction with every script_sig blanked.

    Covers all outpoints, outputs, and the lock time, so a signature cannot
    be replayed onto a different spend.
    """
    stripped = Transaction(
        inputs=tuple(TxInput(i.prev_txid, i.prev_index) for i in tx.inputs),
        outputs=tx.outputs,
        lock_time=tx.lock_time,
    )
    return sha256(stripped.encode())


def unlock_script(signature: bytes, pubkey: bytes) -> Script:
    """Standard unlocking script for a pay-to-hash output."""
    return Script((signature, pubkey))


def pay_to_hash_output(pubkey_hash: bytes, value: int) -> TxOutput:
    return TxOutput(value, pay_to_hash_script(pubkey_hash))


def anyone_can_spend_output(value: int) -> TxOutput:
    return TxOutput(value, anyone_can_spend_script())


def data_carrier_output(payload: bytes, value: int = 0) -> TxOutput:
    """Zero-value by default; never enters the spendable set."""
    return TxOutput(value, data_carrier_script(payload))
