"""Chain-wide consensus constants and genesis construction."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .blocks import Block, mine_block
from .hashing import ZERO_HASH
from .script import Script
from .tx import COINBASE_INDEX, Transaction, TxInput, TxOutput, data_carrier_output

__all__ = [
    "COIN",
    "ChainParams",
    "build_genesis",
    "coinbase_transaction",
    "params_from_doc",
    "params_to_doc",
]

COIN = 100_000_000


@dataclass(frozen=True)
class ChainParams:
    """Everything two nodes must agree on before exchanging blocks."""

    name: str = "main"
    difficulty: int = 8
    block_reward: int = 50 * COIN
    coinbase_maturity: int = 2
    max_money: int = 21_000_000 * COIN
    genesis_time: int = 1_700_000_000
    # Spendable outputs appended to the genesis coinbase.  Genesis is
    # accepted axiomatically, so these are not bounded by block_reward.
    premine: tuple[TxOutput, ...] = ()


def coinbase_transaction(
    height: int,
    outputs: tuple[TxOutput, ...],
    tag: bytes = b"",
) -> Transaction:
    """Reward-claiming transaction for a block at ``height``.

    The height push makes coinbase txids unique along a chain; ``tag``
    additionally distinguishes same-height blocks from different miners.
    """
    script_sig = Script((height.to_bytes(4, "little"), tag))
    txin = TxInput(ZERO_HASH, COINBASE_INDEX, script_sig)
    return Transaction((txin,), outputs)


def params_to_doc(params: ChainParams) -> dict:
    """JSON-ready form, round-trippable through params_from_doc."""
    return {
        "name": params.name,
        "difficulty": params.difficulty,
        "block_reward": params.block_reward,
        "coinbase_maturity": params.coinbase_maturity,
        "max_money": params.max_money,
        "genesis_time": params.genesis_time,
        "premine": [
            [out.value, out.script_pubkey.encode().hex()] for out in params.premine
        ],
    }


def params_from_doc(doc: dict) -> ChainParams:
    return ChainParams(
        name=doc["name"],
        difficulty=doc["difficulty"],
        block_reward=doc["block_reward"],
        coinbase_maturity=doc["coinbase_maturity"],
        max_money=doc["max_money"],
        genesis_time=doc["genesis_time"],
        premine=tuple(
            TxOutput(value, Script.decode(bytes.fromhex(script_hex)))
            for value, script_hex in doc["premine"]
        ),
    )


@lru_cache(maxsize=None)
def build_genesis(params: ChainParams) -> Block:
    """Deterministic genesis block for ``params``.

    Output 0 burns the reward into a data carrier naming the chain; any
    premine outputs follow and are spendable under coinbase maturity.
    """
    outputs = (data_carrier_output(params.name.encode(), params.block_reward),) + params.premine
    coinbase = coinbase_transaction(0, outputs, tag=b"genesis")
    return mine_block(ZERO_HASH, [coinbase], params.difficulty, params.genesis_time)
