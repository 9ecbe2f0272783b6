#!/usr/bin/env python3
"""Erase a payload locally, prove it is gone, then keep following the chain.

One node confirms a transaction whose outputs carry an embedded secret,
erases those outputs in anyone-can-spend mode, and later accepts a mined
block in which the rightful owner spends one of them.  The erasing node can
no longer check that signature against anything, so it takes the block on
its proof of work; a second node that never erased verifies the signature
the ordinary way.  Both end on the same tip.

A junk spend of an erased output would also get past the eraser, but every
non-erasing node would reject it; demo 04 plays that conflict out across a
whole network.

Run from the repository root:

    python3 demos/02_erase_and_stay_in_sync.py
"""

from erasechain.chaingen import ChainBuilder, make_data_fanout
from erasechain.core import (
    KeyPair,
    Transaction,
    TxInput,
    coinbase_transaction,
    mine_block,
    pay_to_hash_output,
    signing_message,
    unlock_script,
)
from erasechain.node import BLOCK_EXTENDED, NodeConfig, NodeState

SECRET = b"never-should-have-been-on-chain: " + bytes(range(16))
OWNER = KeyPair.from_int(900)  # holds the keyed fan-out output


def everything(node: NodeState) -> bytes:
    stores = node.stores
    return (
        stores.blocks.encode()
        + stores.undo.encode()
        + stores.utxo.encode()
        + stores.erasures.encode()
    )


def main() -> None:
    builder = ChainBuilder(seed=11)
    builder.advance(3)
    fanout = make_data_fanout(builder, [SECRET], [OWNER], value_per_output=7)
    builder.mine([fanout])
    builder.advance(2)

    eraser = NodeState(node_id=0, config=NodeConfig(params=builder.params, maturity=1))
    witness = NodeState(node_id=1, config=NodeConfig(params=builder.params, maturity=1))
    for block in builder.blocks[1:]:
        eraser.handle_block(block)
        witness.handle_block(block)
    print(f"both nodes at height {eraser.tip_height}, tip {eraser.tip_hash.hex()[:16]}...")
    print(f"secret on disk before erasing: {SECRET in everything(eraser)}")

    receipt = eraser.erase(fanout.txid, (0, 1), "anyonecanspend")
    print(f"erase receipt: {receipt.describe()}")
    print(f"secret on disk after erasing:  {SECRET in everything(eraser)}")
    assert SECRET not in everything(eraser)

    # The owner spends the keyed output, signature and all.  The witness
    # checks that signature against the original script; the eraser has
    # only a redacted stand-in left and accepts the block on its work.
    unsigned = Transaction(
        (TxInput(fanout.txid, 1),),
        (pay_to_hash_output(KeyPair.from_int(901).pubkey_hash, 7),),
    )
    signature = OWNER.sign(signing_message(unsigned))
    spend = Transaction(
        (TxInput(fanout.txid, 1, unlock_script(signature, OWNER.pubkey)),),
        unsigned.outputs,
    )
    height = builder.height + 1
    coinbase = coinbase_transaction(
        height,
        (pay_to_hash_output(builder.key(0).pubkey_hash, builder.params.block_reward),),
        tag=b"spender",
    )
    block = mine_block(
        builder.tip_hash, [coinbase, spend], builder.params.difficulty, builder.time
    )

    verdict_eraser = eraser.handle_block(block)
    verdict_witness = witness.handle_block(block)
    print(f"owner's spend of an erased output, mined: eraser says "
          f"{verdict_eraser.outcome}, witness says {verdict_witness.outcome}")
    assert verdict_eraser.outcome == verdict_witness.outcome == BLOCK_EXTENDED
    print(f"tips still equal: {eraser.tip_hash == witness.tip_hash}")


if __name__ == "__main__":
    main()
