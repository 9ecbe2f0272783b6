#!/usr/bin/env python3
"""Build a small chain, feed it to a node, and watch a bad block bounce.

Run from the repository root:

    python3 demos/01_build_and_validate.py
"""

from erasechain.chaingen import ChainBuilder
from erasechain.core import (
    coinbase_transaction,
    mine_block,
    pay_to_hash_output,
)
from erasechain.node import BLOCK_EXTENDED, BLOCK_REJECTED, NodeConfig, NodeState


def main() -> None:
    builder = ChainBuilder(seed=7)
    builder.advance(12, max_txs=2)
    print(f"built {builder.height} blocks, tip {builder.tip_hash.hex()[:16]}...")

    node = NodeState(config=NodeConfig(params=builder.params, maturity=10))
    for block in builder.blocks[1:]:
        result = node.handle_block(block)
        assert result.outcome == BLOCK_EXTENDED, result
    print(f"node synced to height {node.tip_height}, "
          f"{len(node.stores.utxo)} unspent outputs, "
          f"{node.stores.utxo.total_value()} total value")

    # A miner claiming one unit too much reward is rejected outright.
    height = node.tip_height + 1
    greedy = coinbase_transaction(
        height,
        (pay_to_hash_output(node.miner_key.pubkey_hash, node.params.block_reward + 1),),
        tag=b"greedy",
    )
    bad = mine_block(node.tip_hash, [greedy], node.params.difficulty, builder.time)
    result = node.handle_block(bad)
    print(f"overclaimed coinbase: {result.outcome} ({result.reason})")
    assert result.outcome == BLOCK_REJECTED

    # An honest block at the same height connects fine.
    good = builder.mine()
    result = node.handle_block(good)
    print(f"honest block at the same height: {result.outcome}, "
          f"tip now {node.tip_hash.hex()[:16]}... at height {node.tip_height}")


if __name__ == "__main__":
    main()
