"""End-to-end acceptance checks, one test per headline guarantee.

Run ``pytest -v tests/test_acceptance.py`` to get exactly one pass/fail
line per criterion; each test also prints a ``PASS criterion N`` line with
its runtime, visible under ``-s`` or ``-rA``.  Every check is judged
against something independent of the code under test: a from-scratch
reference validator, direct script evaluation, byte scans of persisted
files, or pinned report digests.
"""

from __future__ import annotations

import functools
import hashlib
import json
import os
import random
import time

from conftest import TEST_PARAMS, feed, make_node, signed_spend, utxo_snapshot
from erasechain.chaingen import ChainBuilder, distinct_payloads, make_data_fanout
from erasechain.cli import main as cli_main
from erasechain.core import (
    Block,
    BlockHeader,
    KeyPair,
    OutPoint,
    Script,
    SignatureContext,
    Transaction,
    TxInput,
    TxOutput,
    anyone_can_spend_output,
    coinbase_transaction,
    compute_merkle_root,
    eval_script,
    match_pay_to_hash,
    mine_block,
    params_to_doc,
    pay_to_hash_output,
    pay_to_hash_script,
    sha256,
    unlock_script,
    verify_signature,
)
from erasechain.erasure import (
    ANYONE_CAN_SPEND,
    CHECK_PASS,
    HASH_COMMITMENT,
    ErasureMode,
    ErasureRecord,
    check_erased_spend,
    redact_transaction,
)
from erasechain.netsim import LEAF_DISCARDED, LEAF_LONGEST, LEAF_REORGED, run_scenario
from erasechain.node import (
    BLOCK_EXTENDED,
    NodeConfig,
    NodeState,
    TX_ACCEPTED,
    TX_DROPPED_DEPENDS,
    TX_DROPPED_ERASED,
)
from erasechain.presets import (
    SCENARIO_MAJORITY,
    SCENARIO_MINORITY,
    SCENARIO_NO_ERASURE,
    build_scenario,
)
from erasechain.storage import DataDir, encode_chain
from reference_validator import ReferenceNode

HERE = os.path.dirname(os.path.abspath(__file__))
GOLDEN = json.load(open(os.path.join(HERE, "data", "golden.json")))

# Push-only garbage: proves no key material is needed to spend an output
# erased in anyone-can-spend mode.
JUNK_UNLOCK = Script((b"\x11" * 64, b"\x22" * 32))

SPEND_KEY = KeyPair.from_int(7001)  # keyed fan-out output, kept out of builder wallets


def _verdict(number: int, label: str, started: float, budget: float) -> None:
    elapsed = time.perf_counter() - started
    assert elapsed < budget, f"criterion {number} took {elapsed:.1f}s, budget {budget:.0f}s"
    print(f"PASS criterion {number}: {label} ({elapsed:.2f}s)")


def _value_view(node: NodeState) -> set[tuple[bytes, int, int]]:
    """UTXO entries down to (txid, index, value): the script-independent
    part, which erasure must preserve exactly."""
    return {(t, i, v) for t, i, v, *_ in utxo_snapshot(node.stores.utxo)}


def _block_on(node: NodeState, txs, tag: bytes) -> Block:
    height = node.tip_height + 1
    coinbase = coinbase_transaction(
        height,
        (pay_to_hash_output(node.miner_key.pubkey_hash, node.params.block_reward),),
        tag=tag,
    )
    return mine_block(
        node.tip_hash, [coinbase, *txs], node.params.difficulty, node.params.genesis_time + height
    )


@functools.lru_cache(maxsize=None)
def _fanout_chain():
    """Six-block chain with a three-payload fan-out buried two deep."""
    builder = ChainBuilder(seed=2024)
    payloads = distinct_payloads(seed=99, count=3)
    builder.advance(3)
    fanout = make_data_fanout(builder, payloads, [SPEND_KEY], value_per_output=5)
    builder.mine([fanout])
    builder.advance(2)
    return builder, fanout, tuple(payloads)


def _erased_node(mode: str = ANYONE_CAN_SPEND):
    """Fresh node fed the fan-out chain, payload outputs already erased."""
    builder, fanout, payloads = _fanout_chain()
    node = make_node(maturity=1)
    feed(node, builder.blocks)
    assert node.tip_hash == builder.tip_hash
    node.erase(fanout.txid, range(len(payloads)), mode)
    return node, fanout, payloads


@functools.lru_cache(maxsize=None)
def _long_chain():
    """200 blocks; height 20 holds a 155-output fan-out (152 payload slots,
    two keyed, one change), with both keyed outputs spent far later."""
    builder = ChainBuilder(seed=4242)
    keys = (KeyPair.from_int(7100), KeyPair.from_int(7101))
    # A seed distinct from the builder's: the builder emits random data
    # carriers from the same generator family, and a shared seed can
    # reproduce payload byte runs in blocks that are never erased.
    payloads = distinct_payloads(seed=77, count=152)
    builder.advance(19)
    fanout = make_data_fanout(builder, payloads, list(keys), value_per_output=2)
    assert len(fanout.outputs) == 155
    fanout_height = builder.height + 1
    builder.mine([fanout])
    builder.advance(169)
    spends = tuple(
        signed_spend(
            key,
            OutPoint(fanout.txid, len(payloads) + i),
            [pay_to_hash_output(KeyPair.from_int(7110 + i).pubkey_hash, 2)],
        )
        for i, key in enumerate(keys)
    )
    builder.mine([spends[0]])
    builder.advance(3)
    builder.mine([spends[1]])
    builder.advance(6)
    assert builder.height == 200
    return builder, fanout, fanout_height, tuple(payloads), spends


# Criterion 1: the four transaction-intake decision leaves.


def test_criterion_1_intake_decisions_cover_every_leaf():
    started = time.perf_counter()
    node, fanout, payloads = _erased_node()

    # A re-announced transaction that was erased locally: dropped by txid,
    # and the announcement gate will not ask for it again.
    assert node.handle_transaction(fanout).outcome == TX_DROPPED_ERASED
    assert node.should_request("tx", fanout.txid) is False

    # An unconfirmed spend of an erased output: dropped, never pooled.
    depends = Transaction(
        (TxInput(fanout.txid, 0, JUNK_UNLOCK),), (anyone_can_spend_output(5),)
    )
    result = node.handle_transaction(depends)
    assert result.outcome == TX_DROPPED_DEPENDS
    assert result.erased_outpoints == (OutPoint(fanout.txid, 0),)
    assert depends.txid not in node.mempool

    # An ordinary spend touching nothing erased: accepted.
    normal = signed_spend(
        SPEND_KEY,
        OutPoint(fanout.txid, len(payloads)),
        [pay_to_hash_output(KeyPair.from_int(7002).pubkey_hash, 5)],
    )
    assert node.handle_transaction(normal).outcome == TX_ACCEPTED

    # The same kind of erased-output spend arriving inside a mined block:
    # accepted on the block's proof of work alone.
    mined_spend = Transaction(
        (TxInput(fanout.txid, 1, JUNK_UNLOCK),), (anyone_can_spend_output(5),)
    )
    block = _block_on(node, [mined_spend], tag=b"c1")
    assert node.handle_block(block).outcome == BLOCK_EXTENDED
    assert node.confirmations(mined_spend.txid) == 1

    _verdict(1, "all four intake decision leaves reached", started, 1.0)


# Criterion 2: a node that erased 155 outputs stays in sync through blocks
# that spend them.


def test_criterion_2_erasing_node_stays_in_sync():
    started = time.perf_counter()
    builder, fanout, fanout_height, payloads, spends = _long_chain()
    erasing = make_node(maturity=10, node_id=1)
    plain = make_node(maturity=10, node_id=2)
    oracle = ReferenceNode(TEST_PARAMS)

    erased = False
    for height, block in enumerate(builder.blocks[1:], 1):
        a = erasing.handle_block(block)
        b = plain.handle_block(block)
        ok, _ = oracle.accept(block)
        assert ok and a.outcome == BLOCK_EXTENDED and b.outcome == BLOCK_EXTENDED
        assert erasing.tip_hash == plain.tip_hash == block.block_hash
        if not erased and height - fanout_height >= erasing.config.maturity:
            receipt = erasing.erase(
                fanout.txid, range(len(fanout.outputs)), ANYONE_CAN_SPEND
            )
            assert set(receipt.erased) == set(range(len(fanout.outputs)))
            erased = True

    assert erased and erasing.tip_height == 200
    for spend in spends:  # erased outputs were spent long after the erase
        assert erasing.confirmations(spend.txid) > 0
    assert _value_view(erasing) == _value_view(plain)
    assert oracle.tip_hash == erasing.tip_hash == plain.tip_hash
    _verdict(2, "erasing node tracked 200 blocks with zero divergence", started, 30.0)


# Criterion 3: the post-erasure checklist, all four points in one pass.


def test_criterion_3_post_erasure_checklist():
    started = time.perf_counter()
    node, fanout, payloads = _erased_node()
    record = node.stores.erasures.lookup(fanout.txid)
    assert record is not None

    # (a) the announcement gate never requests an erased transaction
    assert node.should_request("tx", fanout.txid) is False
    assert node.should_request("tx", sha256(b"some unseen txid")) is True

    # (b) UTXO entries for erased outputs exist only in redacted form
    for index in sorted(record.erased_indices):
        entry = node.stores.utxo.get(OutPoint(fanout.txid, index))
        assert entry is not None  # nothing has spent them yet
        assert entry.output.value == fanout.outputs[index].value
        raw = entry.output.script_pubkey.encode()
        assert raw == record.redacted_tx.outputs[index].script_pubkey.encode()
        assert all(p not in raw for p in payloads)

    # (c) every lookup surface answers with the stand-in, never the original
    stand_in = node.get_transaction(fanout.txid)
    assert stand_in is not None and stand_in.txid != fanout.txid
    served = b"".join(
        node.serve_block(node.by_height[h]) or b"" for h in range(node.tip_height + 1)
    )
    stored = b"".join(
        block.encode()
        for block in (node.get_block(node.by_height[h]) for h in range(node.tip_height + 1))
        if block is not None
    )
    for blob in (stand_in.encode(), served, stored):
        assert fanout.encode() not in blob
        assert all(p not in blob for p in payloads)

    # (d) a mined block spending an erased output still connects
    spend = Transaction(
        (TxInput(fanout.txid, 2, JUNK_UNLOCK),), (anyone_can_spend_output(5),)
    )
    assert node.handle_transaction(spend).outcome == TX_DROPPED_DEPENDS
    block = _block_on(node, [spend], tag=b"c3")
    assert node.handle_block(block).outcome == BLOCK_EXTENDED
    assert node.confirmations(spend.txid) == 1

    _verdict(3, "announcement gate, UTXO form, lookups, mined spends", started, 10.0)


# Criterion 4: no fragment of an erased payload survives in any persisted
# file, across both modes, a bulk erase, and the command-line path.


def test_criterion_4_erased_payload_bytes_never_persist(tmp_path):
    started = time.perf_counter()
    cases = []

    node, _, payloads = _erased_node()
    cases.append(("anyone-can-spend", node))
    commitment_node, _, _ = _erased_node(mode=HASH_COMMITMENT)
    cases.append(("commitment", commitment_node))

    builder, fanout, _, long_payloads, _ = _long_chain()
    bulk = make_node(maturity=10, node_id=3)
    feed(bulk, builder.blocks)
    bulk.erase(fanout.txid, range(len(fanout.outputs)), ANYONE_CAN_SPEND)
    cases.append(("bulk", bulk))

    files = []
    for name, case_node in cases:
        datadir = DataDir(str(tmp_path / name))
        case_node.save(datadir)
        files.extend(datadir.all_files())

    # The command-line path: sync a fresh datadir, then erase through it.
    small_builder, small_fanout, small_payloads = _fanout_chain()
    fanout_block = next(
        b
        for b in small_builder.blocks
        if any(tx.txid == small_fanout.txid for tx in b.transactions)
    )
    chain_path = tmp_path / "chain.dat"
    chain_path.write_bytes(encode_chain(small_builder.blocks))
    params_path = tmp_path / "params.json"
    params_path.write_text(json.dumps(params_to_doc(TEST_PARAMS)))
    config_path = tmp_path / "erase.json"
    config_path.write_text(
        json.dumps(
            {
                "chain": TEST_PARAMS.name,
                "erase": {
                    fanout_block.block_hash.hex(): {small_fanout.txid.hex(): [0, 1, 2]}
                },
            }
        )
    )
    cli_dir = str(tmp_path / "clidir")
    args = ["--datadir", cli_dir, "--maturity", "1"]
    assert cli_main(["sync", *args, "--chain", str(chain_path), "--params", str(params_path)]) == 0
    assert cli_main(["erase", *args, "--config", str(config_path)]) == 0
    files.extend(DataDir(cli_dir).all_files())

    every_payload = set(payloads) | set(long_payloads) | set(small_payloads)
    scanned = 0
    for path in files:
        with open(path, "rb") as fh:
            blob = fh.read()
        for payload in every_payload:
            for i in range(len(payload) - 7):
                assert payload[i : i + 8] not in blob, (path, payload.hex(), i)
        scanned += 1
    assert scanned >= 20  # three saved datadirs plus the CLI one, every file read
    _verdict(4, f"zero payload fragments across {scanned} persisted files", started, 60.0)


# Criterion 5: commitment-mode spend checks agree with full script
# evaluation, and a commitment-mode eraser judges blocks like a plain node.


def _erase_confirmed_outputs(node: NodeState, limit: int = 3) -> int:
    """Erase, in commitment mode, every pay-to-hash output of up to
    ``limit`` buried transactions, chosen canonically from the UTXO set."""
    horizon = node.tip_height - node.config.maturity
    eligible: dict[bytes, list[int]] = {}
    for op, entry in sorted(
        node.stores.utxo.items(), key=lambda kv: (kv[0].txid, kv[0].index)
    ):
        if entry.height == 0 or entry.height > horizon:
            continue
        if match_pay_to_hash(entry.output.script_pubkey) is None:
            continue
        eligible.setdefault(op.txid, []).append(op.index)
    for txid in list(eligible)[:limit]:
        node.erase(txid, eligible[txid], HASH_COMMITMENT)
    return min(len(eligible), limit)


def test_criterion_5_commitment_checks_match_script_evaluation():
    started = time.perf_counter()

    rng = random.Random(555)
    trials = 0
    for round_no in range(250):
        owner = KeyPair.from_int(rng.getrandbits(64) + 1)
        stranger = KeyPair.from_int(rng.getrandbits(64) + 1)
        salt = rng.randbytes(16)
        lock = pay_to_hash_script(owner.pubkey_hash)
        tx = Transaction(
            (TxInput(sha256(b"fund-%d" % round_no), 0),), (TxOutput(9, lock),)
        )
        redacted, erased = redact_transaction(tx, [0], ErasureMode.commitment(salt))
        record = ErasureRecord(tx.txid, sha256(b"holder"), redacted, erased)
        message = rng.randbytes(32)
        ctx = SignatureContext(message, verify_signature)
        candidates = [
            unlock_script(owner.sign(message), owner.pubkey),  # valid
            unlock_script(stranger.sign(message), stranger.pubkey),  # wrong key
            unlock_script(owner.sign(rng.randbytes(32)), owner.pubkey),  # stale message
            unlock_script(owner.sign(message), stranger.pubkey),  # mismatched pubkey
            unlock_script(rng.randbytes(64), owner.pubkey),  # garbage signature
        ]
        for script_sig in candidates:
            before = eval_script(script_sig, lock, ctx)
            after = check_erased_spend(record, 0, script_sig, ctx) == CHECK_PASS
            assert before == after, (round_no, script_sig.encode().hex())
            trials += 1
    assert trials >= 1000

    # Block verdicts: an eraser holding only commitments matches a plain
    # node over 100 random chains, including chains that spend what it erased.
    total_records = 0
    for seed in range(100):
        builder = ChainBuilder(seed=9000 + seed)
        builder.advance(8, max_txs=2)
        chain_rng = random.Random(seed)
        eraser = NodeState(
            node_id=0,
            config=NodeConfig(params=TEST_PARAMS, maturity=1),
            salt_source=lambda: chain_rng.randbytes(16),
        )
        plain = make_node(maturity=1, node_id=1)
        for height, block in enumerate(builder.blocks[1:], 1):
            a = eraser.handle_block(block)
            b = plain.handle_block(block)
            assert (a.outcome, a.reason) == (b.outcome, b.reason), (seed, height)
            assert eraser.tip_hash == plain.tip_hash
            if height == 4:
                _erase_confirmed_outputs(eraser)
        total_records += len(eraser.stores.erasures)
        assert _value_view(eraser) == _value_view(plain)
    assert total_records >= 100  # the differential was not vacuous

    _verdict(5, f"{trials} spend-check trials and 100 chains agree", started, 60.0)


# Criterion 6: the three pinned network scenarios reach their outcome
# leaves deterministically.


def test_criterion_6_scenario_outcomes_and_determinism():
    started = time.perf_counter()
    expected_leaf = {
        SCENARIO_NO_ERASURE: LEAF_DISCARDED,
        SCENARIO_MINORITY: LEAF_REORGED,
        SCENARIO_MAJORITY: LEAF_LONGEST,
    }
    for name, leaf in expected_leaf.items():
        report = run_scenario(build_scenario(name))
        again = run_scenario(build_scenario(name))
        assert report.to_json() == again.to_json()  # byte-identical reruns
        (outcome,) = report.rogue_outcomes
        assert outcome.leaf == leaf
        assert report.all_tips_equal
        digest = hashlib.sha256(report.to_json().encode()).hexdigest()
        assert digest == GOLDEN["scenarios"][name]["report_sha256"]
    _verdict(6, "all three rogue-spend scenarios reach their leaves", started, 60.0)


# Criterion 7: pruning and empty-target erasure perturb nothing.


def test_criterion_7_pruning_and_empty_erasure_change_nothing():
    started = time.perf_counter()
    for seed in range(25):
        builder = ChainBuilder(seed=3000 + seed)
        builder.advance(300, max_txs=2)
        archival = make_node(maturity=400, node_id=1)
        pruning = make_node(maturity=10, node_id=2)
        erasing = make_node(maturity=10, node_id=3)
        nodes = (archival, pruning, erasing)
        verdicts: tuple[list, list, list] = ([], [], [])
        for height, block in enumerate(builder.blocks[1:], 1):
            for i, node in enumerate(nodes):
                result = node.handle_block(block)
                verdicts[i].append((result.outcome, result.reason))
            if height % 50 == 0:
                pruning.prune()
                victim = builder.blocks[height - 20].transactions[0].txid
                receipt = erasing.erase(victim, (), ANYONE_CAN_SPEND)
                assert receipt.erased == () and receipt.blocks_rewritten == 0
        assert verdicts[0] == verdicts[1] == verdicts[2]
        assert archival.tip_hash == pruning.tip_hash == erasing.tip_hash
        assert len(erasing.stores.erasures) == 0  # empty targets left no trace
        snapshots = [utxo_snapshot(node.stores.utxo) for node in nodes]
        assert snapshots[0] == snapshots[1] == snapshots[2]
    _verdict(7, "archival, pruning, and no-op erasing nodes agree 25 times", started, 120.0)


# Criterion 8: with nothing erased, the whole pipeline is indistinguishable
# from the standalone reference validator.


def _keyed_outpoint(builder: ChainBuilder):
    for op in builder.spendable():
        entry = builder.wallet[op]
        if entry.key is not None and entry.value >= 2:
            return op, entry.key
    raise AssertionError("no keyed outpoint left to double-spend")


def _tampered_blocks(builder: ChainBuilder) -> list[Block]:
    """Five invalid candidates on the current tip, one per failure class."""
    params = builder.params
    height = builder.height + 1
    miner = builder.key(0)

    def cb(extra: int = 0, tag: bytes = b"cb") -> Transaction:
        reward = params.block_reward + extra
        return coinbase_transaction(
            height, (pay_to_hash_output(miner.pubkey_hash, reward),), tag=tag
        )

    blocks = []
    blocks.append(mine_block(builder.tip_hash, [cb(extra=1)], params.difficulty, builder.time))

    phantom = Transaction(
        (TxInput(sha256(b"phantom"), 0, JUNK_UNLOCK),), (anyone_can_spend_output(1),)
    )
    blocks.append(
        mine_block(builder.tip_hash, [cb(tag=b"ph"), phantom], params.difficulty, builder.time)
    )

    good = mine_block(builder.tip_hash, [cb(tag=b"mk")], params.difficulty, builder.time)
    wrong_root = compute_merkle_root([sha256(b"some other transaction set")])
    header = good.header
    blocks.append(
        Block(BlockHeader(header.prev_block_hash, wrong_root, header.time, header.nonce),
              good.transactions)
    )

    op, key = _keyed_outpoint(builder)
    first = signed_spend(key, op, [anyone_can_spend_output(1)])
    second = signed_spend(key, op, [anyone_can_spend_output(2)])
    blocks.append(
        mine_block(builder.tip_hash, [cb(tag=b"dd"), first, second], params.difficulty, builder.time)
    )

    tip_coinbase = builder.blocks[-1].transactions[0]
    immature = signed_spend(miner, OutPoint(tip_coinbase.txid, 0), [anyone_can_spend_output(1)])
    blocks.append(
        mine_block(builder.tip_hash, [cb(tag=b"im"), immature], params.difficulty, builder.time)
    )
    return blocks


def test_criterion_8_pipeline_matches_reference_validator():
    started = time.perf_counter()
    for seed in range(50):
        builder = ChainBuilder(seed=7000 + seed)
        builder.advance(20, max_txs=2)
        node = make_node(maturity=50, node_id=4)
        oracle = ReferenceNode(TEST_PARAMS)
        for block in list(builder.blocks[1:]) + _tampered_blocks(builder):
            result = node.handle_block(block)
            got = (result.outcome == BLOCK_EXTENDED, result.reason)
            assert got == oracle.accept(block), (seed, block.block_hash.hex())
        assert len(node.stores.erasures) == 0
        assert node.tip_hash == oracle.tip_hash
        assert node.tip_height == oracle.height == 20
        assert utxo_snapshot(node.stores.utxo) == oracle.utxo_snapshot()
    _verdict(8, "node pipeline equals reference validator on 50 chains", started, 120.0)
