"""Deterministic synthetic chains for tests, demos, and simulations.

ChainBuilder grows a valid chain block by block while tracking which
outputs it can still spend and with which keys.  Everything is driven by a
seeded RNG, so a given seed always produces the same chain, byte for byte.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .core.blocks import Block, mine_block
from .core.keys import KeyPair
from .core.params import ChainParams, build_genesis, coinbase_transaction
from .core.script import Script, anyone_can_spend_script, pay_to_hash_script
from .core.tx import (
    OutPoint,
    Transaction,
    TxInput,
    TxOutput,
    anyone_can_spend_output,
    data_carrier_output,
    pay_to_hash_output,
    signing_message,
    unlock_script,
)


@dataclass
class WalletEntry:
    value: int
    key: KeyPair | None  # None: anyone-can-spend, no signature needed
    height: int
    is_coinbase: bool


class ChainBuilder:
    def __init__(self, params: ChainParams | None = None, seed: int = 0):
        self.params = params or ChainParams(name="test", difficulty=0)
        self.rng = random.Random(seed)
        genesis = build_genesis(self.params)
        self.blocks: list[Block] = [genesis]
        self.tip_hash = genesis.block_hash
        self.height = 0
        self.time = self.params.genesis_time + 1
        self.wallet: dict[OutPoint, WalletEntry] = {}
        self._keys: dict[int, KeyPair] = {}
        self._script_owner: dict[bytes, KeyPair] = {}

    def key(self, i: int) -> KeyPair:
        if i not in self._keys:
            key = KeyPair.from_int(i)
            self._keys[i] = key
            self._script_owner[pay_to_hash_output(key.pubkey_hash, 0).script_pubkey.encode()] = key
        return self._keys[i]

    def register_premine(self, index: int, key: KeyPair | None) -> None:
        """Claim a genesis premine output (coinbase output ``index``) for the wallet."""
        genesis_cb = self.blocks[0].transactions[0]
        output = genesis_cb.outputs[index]
        self.wallet[OutPoint(genesis_cb.txid, index)] = WalletEntry(
            output.value, key, 0, is_coinbase=True
        )

    def _absorb(self, tx: Transaction, height: int) -> None:
        is_coinbase = tx.is_coinbase()
        for index, output in enumerate(tx.outputs):
            if output.script_pubkey.is_unspendable():
                continue
            owner = self._script_owner.get(output.script_pubkey.encode())
            if owner is None and output.script_pubkey != anyone_can_spend_script():
                continue
            self.wallet[OutPoint(tx.txid, index)] = WalletEntry(
                output.value, owner, height, is_coinbase
            )

    def mine(self, txs: list[Transaction] | tuple = (), miner: int = 0) -> Block:
        height = self.height + 1
        key = self.key(miner)
        coinbase = coinbase_transaction(
            height,
            (pay_to_hash_output(key.pubkey_hash, self.params.block_reward),),
            tag=b"cb",
        )
        block = mine_block(
            self.tip_hash, [coinbase, *txs], self.params.difficulty, self.time
        )
        self.time += 1
        self._absorb(coinbase, height)
        for tx in txs:
            self._absorb(tx, height)
        self.blocks.append(block)
        self.tip_hash = block.block_hash
        self.height = height
        return block

    def spendable(self) -> list[OutPoint]:
        """Wallet outpoints mature enough to spend in the next block."""
        next_height = self.height + 1
        return [
            op
            for op, entry in self.wallet.items()
            if not entry.is_coinbase
            or next_height - entry.height >= self.params.coinbase_maturity
        ]

    def build_tx(
        self,
        outpoints: list[OutPoint],
        outputs: list[TxOutput],
        lock_time: int = 0,
    ) -> Transaction:
        """Sign a spend of wallet outpoints.  Reserves them immediately so a
        later build in the same block cannot double-spend."""
        entries = [self.wallet.pop(op) for op in outpoints]
        unsigned = Transaction(
            tuple(TxInput(op.txid, op.index) for op in outpoints),
            tuple(outputs),
            lock_time,
        )
        message = signing_message(unsigned)
        inputs = []
        for op, entry in zip(outpoints, entries):
            if entry.key is None:
                inputs.append(TxInput(op.txid, op.index))
            else:
                inputs.append(
                    TxInput(op.txid, op.index, unlock_script(entry.key.sign(message), entry.key.pubkey))
                )
        return Transaction(tuple(inputs), tuple(outputs), lock_time)

    def random_tx(self) -> Transaction | None:
        """One seeded random spend: mixed output kinds, occasional lock times."""
        candidates = self.spendable()
        if not candidates:
            return None
        n_inputs = min(len(candidates), self.rng.randint(1, 2))
        chosen = self.rng.sample(candidates, n_inputs)
        total = sum(self.wallet[op].value for op in chosen)
        if total < 2:
            return None
        outputs: list[TxOutput] = []
        n_outputs = self.rng.randint(1, 3)
        remaining = total
        for i in range(n_outputs):
            value = remaining if i == n_outputs - 1 else self.rng.randint(1, max(1, remaining // 2))
            remaining -= value
            roll = self.rng.random()
            if roll < 0.70:
                outputs.append(pay_to_hash_output(self.key(self.rng.randint(0, 30)).pubkey_hash, value))
            elif roll < 0.85:
                outputs.append(anyone_can_spend_output(value))
            else:
                # Data carriers burn their value slice.
                outputs.append(data_carrier_output(self.rng.randbytes(self.rng.randint(4, 40)), 0))
        lock_time = self.height + 1 if self.rng.random() < 0.1 else 0
        return self.build_tx(chosen, outputs, lock_time)

    def advance(self, blocks: int = 1, max_txs: int = 2) -> None:
        for _ in range(blocks):
            txs = []
            for _ in range(self.rng.randint(0, max_txs)):
                tx = self.random_tx()
                if tx is not None:
                    txs.append(tx)
            self.mine(txs)


def distinct_payloads(seed: int, count: int, size: int = 24) -> list[bytes]:
    """Recognizable unique payloads, each with a marker prefix so a byte scan
    over persisted files can assert their absence after erasure."""
    rng = random.Random(seed)
    return [b"PAYLOAD-%04d-" % i + rng.randbytes(size) for i in range(count)]


def make_data_fanout(
    builder: ChainBuilder,
    payloads: list[bytes],
    keyed_keys: list[KeyPair],
    value_per_output: int = 1,
) -> Transaction:
    """A transaction fanning out into payload-bearing and key-locked outputs.

    Payload outputs use the standard pay-to-hash shape with the payload in
    the committed-hash slot, so the data sits byte-exact in the locking
    script and the output is unspendable in practice (no known preimage).
    Keyed outputs are ordinary pay-to-hash locks appended at the end, at
    indices ``len(payloads) .. len(payloads)+len(keyed_keys)-1``.
    """
    outputs = [TxOutput(value_per_output, pay_to_hash_script(p)) for p in payloads]
    outputs += [pay_to_hash_output(k.pubkey_hash, value_per_output) for k in keyed_keys]
    need = sum(o.value for o in outputs)
    chosen: list[OutPoint] = []
    total = 0
    for op in builder.spendable():
        chosen.append(op)
        total += builder.wallet[op].value
        if total >= need:
            break
    if total < need:
        raise ValueError(f"builder wallet holds {total}, need {need}")
    if total > need:
        outputs.append(pay_to_hash_output(builder.key(0).pubkey_hash, total - need))
    return builder.build_tx(chosen, outputs)
