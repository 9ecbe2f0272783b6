"""Canned adversarial scenarios: spending an output whose script was erased.

All three scenarios share one chain setup: a funded transaction T_e whose
first output is locked to data with no known preimage (spendable only if
its script is erased away), and a junk-signed spend T_s of that output.
They differ in who erased T_e beforehand and who pushes T_s:

* nobody erased: T_s is injected to every node; each still checks the
  original script, so the spend is dropped everywhere and never mined;
* one rogue miner erased: its own chain briefly carries T_s, then the
  honest majority's chain outgrows it and the spend is reorged away;
* four of five erased: the non-erasing rogue mines T_s without validating,
  the erasing majority accepts the block on its merits, and the spend
  stays in the longest chain for good.
"""

from __future__ import annotations

import random

from .core.keys import KeyPair
from .core.params import COIN, ChainParams, build_genesis
from .core.script import pay_to_hash_script
from .core.tx import (
    Transaction,
    TxInput,
    TxOutput,
    data_carrier_output,
    pay_to_hash_output,
    signing_message,
    unlock_script,
)
from .erasure import ANYONE_CAN_SPEND
from .netsim import EraseEvent, NodeSettings, RogueSpend, ScenarioConfig

SCENARIO_NO_ERASURE = "rogue-spend-no-erasure"
SCENARIO_MINORITY = "rogue-spend-minority-erasure"
SCENARIO_MAJORITY = "rogue-spend-majority-erasure"

SCENARIO_NAMES = (SCENARIO_NO_ERASURE, SCENARIO_MINORITY, SCENARIO_MAJORITY)

_NUM_NODES = 5
_HORIZON = 120
_MINE_INTERVAL = 5
_ERASE_TICK = 32
_SPEND_NOT_BEFORE = 35

# The secret locked into T_e's first output.  There is no known preimage,
# so the output is spendable only once the script itself is erased.
_SECRET_PAYLOAD = b"diary-entry-2031:" + bytes(range(32))


def _funding_and_spend(params: ChainParams) -> tuple[Transaction, Transaction]:
    """Build T_e (spends the premine) and T_s (junk-signed spend of T_e:0)."""
    premine_key = KeyPair.from_int(1001)
    change_key = KeyPair.from_int(1002)
    attacker_key = KeyPair.from_int(1003)
    genesis_cb = build_genesis(params).transactions[0]

    outputs = (
        TxOutput(400 * COIN, pay_to_hash_script(_SECRET_PAYLOAD)),
        data_carrier_output(b"attached note, meant to be erasable", 0),
        pay_to_hash_output(change_key.pubkey_hash, 600 * COIN),
    )
    unsigned = Transaction((TxInput(genesis_cb.txid, 1),), outputs)
    message = signing_message(unsigned)
    t_e = Transaction(
        (
            TxInput(
                genesis_cb.txid,
                1,
                unlock_script(premine_key.sign(message), premine_key.pubkey),
            ),
        ),
        outputs,
    )

    t_s = Transaction(
        (TxInput(t_e.txid, 0, unlock_script(b"\x01" * 64, b"\x02" * 32)),),
        (pay_to_hash_output(attacker_key.pubkey_hash, 400 * COIN),),
    )
    return t_e, t_s


def build_scenario(name: str, seed: int = 42) -> ScenarioConfig:
    if name not in SCENARIO_NAMES:
        raise ValueError(f"unknown scenario {name!r}; pick one of {SCENARIO_NAMES}")
    premine_key = KeyPair.from_int(1001)
    params = ChainParams(
        name="sim",
        difficulty=0,
        coinbase_maturity=1,
        premine=(pay_to_hash_output(premine_key.pubkey_hash, 1000 * COIN),),
    )
    t_e, t_s = _funding_and_spend(params)

    rng = random.Random(seed)
    schedule = tuple(
        (tick, rng.randrange(_NUM_NODES))
        for tick in range(_MINE_INTERVAL, _HORIZON + 1, _MINE_INTERVAL)
    )
    # The rogue must get a turn after the spend unlocks, with room left for
    # the honest majority to answer.
    if not any(
        node == 0 and _SPEND_NOT_BEFORE <= tick <= _HORIZON - 4 * _MINE_INTERVAL
        for tick, node in schedule
    ):
        raise ValueError(f"seed {seed} gives the rogue no usable mining slot")

    inject_txs: list[tuple[int, int, Transaction]] = [(6, 1, t_e)]
    if name == SCENARIO_NO_ERASURE:
        # No rogue miner: the spend only circulates as a loose transaction.
        rogue_node = None
        erasures: tuple[EraseEvent, ...] = ()
        inject_txs += [(_SPEND_NOT_BEFORE, i, t_s) for i in range(_NUM_NODES)]
    elif name == SCENARIO_MINORITY:
        rogue_node = 0
        erasures = (EraseEvent(_ERASE_TICK, 0, t_e.txid, (0, 1), ANYONE_CAN_SPEND),)
    else:
        # The deciding majority erased; the rogue miner itself did not.
        rogue_node = 0
        erasures = tuple(
            EraseEvent(_ERASE_TICK, node, t_e.txid, (0, 1), ANYONE_CAN_SPEND)
            for node in range(1, _NUM_NODES)
        )

    edges = tuple(
        (a, b, 1) for a in range(_NUM_NODES) for b in range(a + 1, _NUM_NODES)
    )
    config = ScenarioConfig(
        name=name,
        seed=seed,
        horizon=_HORIZON,
        params=params,
        nodes=tuple(
            NodeSettings(is_miner=True, rogue=(i == rogue_node), maturity=1)
            for i in range(_NUM_NODES)
        ),
        edges=edges,
        miner_schedule=schedule,
        inject_txs=tuple(inject_txs),
        rogue_spends=(RogueSpend(_SPEND_NOT_BEFORE, rogue_node, t_s),),
        erasures=erasures,
    )
    config.validate()
    return config
