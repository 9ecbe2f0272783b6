"""Redaction, erasure records, spend checks, and the erase rewrite pass."""

import hashlib

import pytest
from hypothesis import given, settings, strategies as st

from erasechain.chaingen import ChainBuilder, make_data_fanout
from erasechain.core import (
    KeyPair,
    Opcode,
    OutPoint,
    Script,
    SignatureContext,
    Transaction,
    TxOutput,
    data_carrier_output,
    pay_to_hash_output,
    sha256,
    unlock_script,
    verify_signature,
)
from erasechain.erasure import (
    ANYONE_CAN_SPEND,
    CHECK_FAIL,
    CHECK_PASS,
    CHECK_UNVERIFIABLE,
    HASH_COMMITMENT,
    SALT_SIZE,
    ConfigError,
    ErasureDb,
    ErasureMode,
    ErasureRecord,
    IndexOutOfRange,
    NotPayToHash,
    UnknownTxid,
    check_erased_spend,
    export_records,
    find_transaction,
    import_records,
    parse_erase_config,
    redact_transaction,
)

from conftest import make_node, feed

SALT = bytes(range(SALT_SIZE))
PAYLOAD = b"SECRET-payload-0001"


def payload_tx(payload: bytes = PAYLOAD, extra: int = 0) -> Transaction:
    """Unconfirmed fan-out: payload lock at 0, data carrier at 1, plain extras after."""
    outputs = [
        TxOutput(40, Script((Opcode.DUP, Opcode.HASH, sha256(payload), Opcode.EQUALVERIFY, Opcode.TRUE))),
        data_carrier_output(payload, 0),
    ]
    outputs += [pay_to_hash_output(KeyPair.from_int(7 + i).pubkey_hash, 10) for i in range(extra)]
    builder = ChainBuilder(seed=3)
    builder.advance(2)
    return builder.build_tx(builder.spendable()[:1], outputs)


# Redaction.


def test_redact_no_indices_is_identity():
    tx = payload_tx()
    redacted, erased = redact_transaction(tx, (), ErasureMode.anyone_can_spend())
    assert redacted == tx
    assert erased == {}


def test_redact_removes_payload_and_keeps_values():
    tx = payload_tx(extra=1)
    redacted, erased = redact_transaction(tx, (0, 1), ErasureMode.anyone_can_spend())
    assert PAYLOAD not in redacted.encode()
    assert PAYLOAD in tx.encode()
    assert [o.value for o in redacted.outputs] == [o.value for o in tx.outputs]
    assert redacted.inputs == tx.inputs and redacted.lock_time == tx.lock_time
    assert redacted.outputs[2] == tx.outputs[2]
    assert set(erased) == {0, 1}
    assert all(ie.mode == ANYONE_CAN_SPEND and ie.salt is None for ie in erased.values())


def test_redact_keeps_unspendable_scripts_unspendable():
    tx = payload_tx()
    redacted, _ = redact_transaction(tx, (0, 1), ErasureMode.anyone_can_spend())
    assert not redacted.outputs[0].script_pubkey.is_unspendable()
    assert redacted.outputs[1].script_pubkey.is_unspendable()
    assert redacted.outputs[1].script_pubkey == Script((Opcode.RETURN,))


def test_redact_changes_txid():
    tx = payload_tx()
    redacted, _ = redact_transaction(tx, (0,), ErasureMode.anyone_can_spend())
    assert redacted.txid != tx.txid


def test_redact_commitment_matches_hashlib():
    key = KeyPair.from_int(11)
    tx = Transaction((), (pay_to_hash_output(key.pubkey_hash, 5),))
    redacted, erased = redact_transaction(tx, (0,), ErasureMode.commitment(SALT))
    expected = hashlib.sha256(SALT + hashlib.sha256(key.pubkey).digest()).digest()
    assert erased[0].commitment == expected
    assert erased[0].salt == SALT
    # and the committed hash itself is no longer in the bytes
    assert key.pubkey_hash not in redacted.encode()


def test_redact_commitment_requires_pay_to_hash():
    tx = payload_tx()  # output 0 is a nonstandard payload lock
    with pytest.raises(NotPayToHash):
        redact_transaction(tx, (0,), ErasureMode.commitment(SALT))


def test_redact_index_out_of_range():
    tx = payload_tx()
    with pytest.raises(IndexOutOfRange):
        redact_transaction(tx, (len(tx.outputs),), ErasureMode.anyone_can_spend())


def test_commitment_salt_length_enforced():
    with pytest.raises(ValueError):
        ErasureMode.commitment(b"short")


# Spend checks against a record.


def record_for(key: KeyPair, mode: ErasureMode) -> ErasureRecord:
    tx = Transaction((), (pay_to_hash_output(key.pubkey_hash, 5),))
    redacted, erased = redact_transaction(tx, (0,), mode)
    return ErasureRecord(tx.txid, sha256(b"blk"), redacted, erased)


def ctx_for(message: bytes) -> SignatureContext:
    return SignatureContext(message, verify_signature)


def test_check_spend_commitment_pass():
    key = KeyPair.from_int(11)
    record = record_for(key, ErasureMode.commitment(SALT))
    message = b"spend-msg"
    sig = unlock_script(key.sign(message), key.pubkey)
    assert check_erased_spend(record, 0, sig, ctx_for(message)) == CHECK_PASS


@pytest.mark.parametrize(
    "mangle",
    [
        lambda key, msg: unlock_script(KeyPair.from_int(12).sign(msg), KeyPair.from_int(12).pubkey),
        lambda key, msg: unlock_script(KeyPair.from_int(12).sign(msg), key.pubkey),
        lambda key, msg: unlock_script(key.sign(b"other message"), key.pubkey),
        lambda key, msg: Script((key.sign(msg), key.pubkey, Opcode.TRUE)),
        lambda key, msg: Script((key.pubkey,)),
        lambda key, msg: Script(()),
    ],
    ids=["wrong-key", "sig-vs-wrong-x", "wrong-message", "not-push-only", "one-item", "empty"],
)
def test_check_spend_commitment_fails(mangle):
    key = KeyPair.from_int(11)
    record = record_for(key, ErasureMode.commitment(SALT))
    message = b"spend-msg"
    assert check_erased_spend(record, 0, mangle(key, message), ctx_for(message)) == CHECK_FAIL


def test_check_spend_anyone_can_spend_is_unverifiable():
    key = KeyPair.from_int(11)
    record = record_for(key, ErasureMode.anyone_can_spend())
    assert check_erased_spend(record, 0, Script(()), ctx_for(b"m")) == CHECK_UNVERIFIABLE


def test_check_spend_unerased_index_raises():
    key = KeyPair.from_int(11)
    record = record_for(key, ErasureMode.commitment(SALT))
    with pytest.raises(IndexOutOfRange):
        check_erased_spend(record, 1, Script(()), ctx_for(b"m"))


@settings(max_examples=60)
@given(
    secret=st.integers(1, 2**31),
    impostor=st.integers(1, 2**31),
    salt=st.binary(min_size=SALT_SIZE, max_size=SALT_SIZE),
    message=st.binary(max_size=64),
)
def test_commitment_check_agrees_with_direct_recompute(secret, impostor, salt, message):
    """Differential: the record check must equal recomputing the double hash."""
    key = KeyPair.from_int(secret)
    other = KeyPair.from_int(impostor)
    record = record_for(key, ErasureMode.commitment(salt))
    for claimant in (key, other):
        script_sig = unlock_script(claimant.sign(message), claimant.pubkey)
        got = check_erased_spend(record, 0, script_sig, ctx_for(message))
        commit_ok = (
            hashlib.sha256(salt + hashlib.sha256(claimant.pubkey).digest()).digest()
            == record.erased[0].commitment
        )
        assert got == (CHECK_PASS if commit_ok else CHECK_FAIL)


# Database encoding.


def test_erasure_db_round_trip_and_canonical_order():
    key = KeyPair.from_int(11)
    a = record_for(key, ErasureMode.commitment(SALT))
    b = record_for(KeyPair.from_int(12), ErasureMode.anyone_can_spend())
    db1, db2 = ErasureDb(), ErasureDb()
    db1.insert(a)
    db1.insert(b)
    db2.insert(b)
    db2.insert(a)
    assert db1.encode() == db2.encode()
    decoded = ErasureDb.decode(db1.encode())
    assert len(decoded) == 2
    got = decoded.lookup(a.original_txid)
    assert got.redacted_tx == a.redacted_tx
    assert got.erased == a.erased
    assert got.block_hash == a.block_hash


def test_erasure_db_empty_encodes_empty():
    assert ErasureDb().encode() == b""
    assert len(ErasureDb.decode(b"")) == 0


@pytest.mark.parametrize(
    "line",
    [
        "nothex " + "00" * 32 + " 00 0:a",
        "00" * 32 + " " + "11" * 32 + " zz 0:a",
        "00" * 32 + " " + "11" * 32 + " 00 0:x",
        "00" * 32 + " " + "11" * 32 + " 00 0:c:aabb:ccdd",  # short salt
        "00" * 32,  # missing fields
    ],
)
def test_erasure_db_rejects_malformed_lines(line):
    from erasechain.erasure import ErasureError

    with pytest.raises(ErasureError):
        ErasureDb.decode((line + "\n").encode())


# The erase pass over node state.


def erased_node(mode_kind: str = ANYONE_CAN_SPEND):
    """Node with a payload fan-out confirmed, a spend of one erased output
    confirmed after it, and the payload tx erased."""
    builder = ChainBuilder(seed=1)
    node = make_node(maturity=1)
    key = builder.key(50)
    payloads = [b"WIPE-ME-%02d-" % i + bytes([i]) * 8 for i in range(3)]
    builder.advance(2)
    fanout = make_data_fanout(builder, payloads, [key], value_per_output=3)
    builder.mine([fanout])
    spend = builder.build_tx(
        [OutPoint(fanout.txid, len(payloads))], [pay_to_hash_output(builder.key(51).pubkey_hash, 3)]
    )
    builder.mine([spend])
    builder.mine()  # bury the spend so the erase depth guard is satisfied
    feed(node, builder.blocks)
    assert node.tip_hash == builder.tip_hash
    return node, builder, fanout, payloads


def test_erase_rewrites_blocks_utxo_and_undo():
    node, builder, fanout, payloads = erased_node()
    indices = tuple(range(len(payloads)))
    receipt = node.erase(fanout.txid, indices, ANYONE_CAN_SPEND)
    assert receipt.erased == indices
    assert receipt.blocks_rewritten == 1
    assert receipt.utxo_rewrites == len(payloads)  # all still unspent
    assert receipt.undo_rewrites == 0  # only the keyed output was ever spent
    record = node.stores.erasures.lookup(fanout.txid)
    assert record is not None and record.erased_indices == set(indices)
    # no payload byte string survives anywhere in persisted state
    stores = node.stores
    blob = stores.blocks.encode() + stores.utxo.encode() + stores.undo.encode() + stores.erasures.encode()
    for payload in payloads:
        assert payload not in blob


def test_erase_is_idempotent_per_index():
    node, builder, fanout, payloads = erased_node()
    node.erase(fanout.txid, (0,), ANYONE_CAN_SPEND)
    receipt = node.erase(fanout.txid, (0, 1), ANYONE_CAN_SPEND)
    assert receipt.erased == (1,)
    assert receipt.already_erased == (0,)
    record = node.stores.erasures.lookup(fanout.txid)
    assert record.erased_indices == {0, 1}


def test_erase_with_no_new_indices_leaves_stores_untouched():
    node, builder, fanout, payloads = erased_node()
    stores = node.stores
    before = (
        stores.blocks.encode(),
        stores.utxo.encode(),
        stores.undo.encode(),
        stores.erasures.encode(),
    )
    receipt = node.erase(fanout.txid, (), ANYONE_CAN_SPEND)
    assert receipt.erased == () and receipt.already_erased == ()
    assert receipt.blocks_rewritten == 0
    node.erase(fanout.txid, (0,), ANYONE_CAN_SPEND)
    repeat = node.erase(fanout.txid, (0,), ANYONE_CAN_SPEND)
    assert repeat.erased == () and repeat.already_erased == (0,)
    mid = stores.blocks.encode()
    node.erase(fanout.txid, (0,), ANYONE_CAN_SPEND)
    assert stores.blocks.encode() == mid
    assert before[3] == b""  # no record existed before the first real erase


def test_erase_unknown_txid_raises():
    node, builder, fanout, payloads = erased_node()
    with pytest.raises(UnknownTxid):
        node.erase(sha256(b"never mined"), (0,), ANYONE_CAN_SPEND)


def test_erase_spent_output_rewrites_undo_entry():
    """Erasing the keyed (already spent) output scrubs it from undo data."""
    node, builder, fanout, payloads = erased_node()
    keyed_index = len(payloads)
    key = builder.key(50)
    receipt = node.erase(fanout.txid, (keyed_index,), ANYONE_CAN_SPEND)
    assert receipt.utxo_rewrites == 0  # already spent, nothing unspent to rewrite
    assert receipt.undo_rewrites == 1
    assert key.pubkey_hash not in node.stores.undo.encode()


def test_find_transaction_prefers_active_chain():
    node, builder, fanout, payloads = erased_node()
    hit = find_transaction(node.stores.blocks, fanout.txid, prefer={builder.blocks[3].block_hash})
    assert hit is not None
    block_hash, tx_index, tx = hit
    assert block_hash == builder.blocks[3].block_hash
    assert tx.txid == fanout.txid


def test_find_transaction_follows_substitution():
    """After an erase, the original txid still resolves to the stored slot."""
    node, builder, fanout, payloads = erased_node()
    node.erase(fanout.txid, (0,), ANYONE_CAN_SPEND)
    hit = find_transaction(node.stores.blocks, fanout.txid)
    assert hit is not None
    _, _, stored = hit
    assert stored.txid != fanout.txid  # the stand-in now lives there
    assert stored == node.stores.erasures.lookup(fanout.txid).redacted_tx


# Record exchange.


def test_export_import_round_trip_and_first_writer_wins():
    key = KeyPair.from_int(11)
    rec_a = record_for(key, ErasureMode.commitment(SALT))
    rec_b = record_for(KeyPair.from_int(12), ErasureMode.anyone_can_spend())
    src = ErasureDb()
    src.insert(rec_a)
    src.insert(rec_b)

    dst = ErasureDb()
    conflicting = record_for(key, ErasureMode.anyone_can_spend())
    dst.insert(conflicting)

    result = import_records(dst, export_records(src))
    assert result.imported == 1
    assert result.conflicts == (rec_a.original_txid,)
    # the existing record was kept
    assert dst.lookup(rec_a.original_txid).erased[0].mode == ANYONE_CAN_SPEND


def test_export_subset_and_unknown_txid():
    key = KeyPair.from_int(11)
    rec = record_for(key, ErasureMode.anyone_can_spend())
    db = ErasureDb()
    db.insert(rec)
    subset = export_records(db, [rec.original_txid])
    assert ErasureDb.decode(subset).lookup(rec.original_txid) is not None
    with pytest.raises(UnknownTxid):
        export_records(db, [sha256(b"missing")])


def test_import_rejects_records_for_unknown_blocks():
    rec = record_for(KeyPair.from_int(11), ErasureMode.anyone_can_spend())
    src = ErasureDb()
    src.insert(rec)
    dst = ErasureDb()
    result = import_records(dst, export_records(src), validate_blocks={sha256(b"other block")})
    assert result.imported == 0
    assert result.unknown_blocks == (rec.original_txid,)
    assert rec.original_txid not in dst


# Erase-config documents.


def test_parse_erase_config_list_and_object_specs():
    block = sha256(b"b").hex()
    tx1, tx2 = sha256(b"t1").hex(), sha256(b"t2").hex()
    doc = (
        '{"chain": "test", "erase": {"%s": {"%s": [0, 2], '
        '"%s": {"indices": [1], "mode": "commitment"}}}}' % (block, tx1, tx2)
    )
    config = parse_erase_config(doc)
    assert config.chain == "test"
    by_txid = {t.txid.hex(): t for t in config.targets}
    assert by_txid[tx1].indices == (0, 2) and by_txid[tx1].mode_kind is None
    assert by_txid[tx2].indices == (1,) and by_txid[tx2].mode_kind == HASH_COMMITMENT
    assert all(t.block_hash.hex() == block for t in config.targets)


@pytest.mark.parametrize(
    "text",
    [
        "not json",
        "[]",
        '{"chain": "t"}',
        '{"chain": "t", "erase": {"zz": {}}}',
        '{"chain": "t", "erase": {"%s": {"zz": [0]}}}' % (sha256(b"b").hex()),
        '{"chain": "t", "erase": {"%s": {"%s": []}}}' % (sha256(b"b").hex(), sha256(b"t").hex()),
        '{"chain": "t", "erase": {"%s": {"%s": [-1]}}}' % (sha256(b"b").hex(), sha256(b"t").hex()),
        '{"chain": "t", "erase": {"%s": {"%s": {"indices": [0], "mode": "nope"}}}}'
        % (sha256(b"b").hex(), sha256(b"t").hex()),
    ],
)
def test_parse_erase_config_rejects_malformed(text):
    with pytest.raises(ConfigError):
        parse_erase_config(text)
