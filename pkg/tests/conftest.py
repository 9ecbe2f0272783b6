"""Shared fixtures and small helpers for the test suite."""

from __future__ import annotations

import pytest

from erasechain.chaingen import ChainBuilder
from erasechain.core import (
    ChainParams,
    KeyPair,
    OutPoint,
    Transaction,
    TxInput,
    TxOutput,
    pay_to_hash_output,
    signing_message,
    unlock_script,
)
from erasechain.node import NodeConfig, NodeState

TEST_PARAMS = ChainParams(name="test", difficulty=0)


@pytest.fixture
def builder() -> ChainBuilder:
    return ChainBuilder(seed=0)


def make_node(params: ChainParams = TEST_PARAMS, maturity: int = 1, **kw) -> NodeState:
    return NodeState(node_id=kw.pop("node_id", 0), config=NodeConfig(params=params, maturity=maturity, **kw))


def feed(node: NodeState, blocks, start: int = 1):
    """Push blocks (skipping genesis by default); returns the results."""
    return [node.handle_block(block) for block in blocks[start:]]


def signed_spend(
    key: KeyPair,
    outpoint: OutPoint,
    outputs: list[TxOutput],
    lock_time: int = 0,
) -> Transaction:
    """One-input pay-to-hash spend signed with ``key``."""
    unsigned = Transaction((TxInput(outpoint.txid, outpoint.index),), tuple(outputs), lock_time)
    message = signing_message(unsigned)
    signed_input = TxInput(
        outpoint.txid, outpoint.index, unlock_script(key.sign(message), key.pubkey)
    )
    return Transaction((signed_input,), tuple(outputs), lock_time)


def utxo_snapshot(utxo) -> set[tuple[bytes, int, int, bytes, int, bool]]:
    """Flatten a UtxoSet to comparable field tuples."""
    return {
        (op.txid, op.index, e.output.value, e.output.script_pubkey.encode(), e.height, e.is_coinbase)
        for op, e in utxo.items()
    }


def simple_send(key: KeyPair, value: int) -> list[TxOutput]:
    return [pay_to_hash_output(key.pubkey_hash, value)]
