"""Local erasure of transaction-output payloads.

Erasing outputs of a confirmed transaction T rewrites every local copy of
its payload-bearing scripts while keeping the node able to validate the
chain, including later spends of the erased outputs.  The erasure database
remembers, per original txid, the redacted stand-in T' and how each erased
index may be spent:

* anyone-can-spend: the locking script is gone, so a later spend of that
  output cannot be checked locally and is accepted once mined (it is never
  relayed from the mempool).
* hash commitment: the output was a standard pay-to-hash lock on hash(X).
  We keep hash(salt || hash(X)) and a salt, so a spend revealing X can be
  checked exactly, without retaining hash(X) itself as a searchable value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

from .core.blocks import Block
from .core.hashing import HASH_SIZE, hash_from_hex, sha256
from .core.script import Opcode, Script, SignatureContext, match_pay_to_hash
from .core.tx import OutPoint, Transaction, TxOutput
from .storage import BlockStore, UndoStore, UtxoSet, UtxoEntry

ANYONE_CAN_SPEND = "anyonecanspend"
HASH_COMMITMENT = "commitment"

SALT_SIZE = 16

# Outcomes of checking a spend against an erasure record.
CHECK_PASS = "pass"
CHECK_FAIL = "fail"
CHECK_UNVERIFIABLE = "unverifiable"


class ErasureError(Exception):
    pass


class UnknownTxid(ErasureError):
    """No stored transaction bytes for the requested txid."""


class IndexOutOfRange(ErasureError):
    pass


class NotPayToHash(ErasureError):
    """Commitment mode requires the standard pay-to-hash locking script."""


class ConfigError(ErasureError):
    """Malformed erase-config document."""


@dataclass(frozen=True)
class ErasureMode:
    kind: str
    salt: bytes | None = None

    @classmethod
    def anyone_can_spend(cls) -> "ErasureMode":
        return cls(ANYONE_CAN_SPEND)

    @classmethod
    def commitment(cls, salt: bytes) -> "ErasureMode":
        if len(salt) != SALT_SIZE:
            raise ValueError(f"salt must be {SALT_SIZE} bytes")
        return cls(HASH_COMMITMENT, salt)


@dataclass(frozen=True)
class IndexErasure:
    """How one erased output index may be spent later."""

    mode: str
    salt: bytes | None = None
    commitment: bytes | None = None


@dataclass
class ErasureRecord:
    """Everything kept about one erased transaction.

    ``redacted_tx`` accumulates: erasing further indices of the same
    transaction updates it in place.  Its txid does NOT equal
    ``original_txid``; block merkle roots commit to the original.
    """

    original_txid: bytes
    block_hash: bytes
    redacted_tx: Transaction
    erased: dict[int, IndexErasure] = field(default_factory=dict)

    @property
    def erased_indices(self) -> frozenset[int]:
        return frozenset(self.erased)


class ErasureDb:
    """All erasure records of one node, keyed by original txid."""

    def __init__(self):
        self._records: dict[bytes, ErasureRecord] = {}

    def lookup(self, txid: bytes) -> ErasureRecord | None:
        return self._records.get(txid)

    def __contains__(self, txid: bytes) -> bool:
        return txid in self._records

    def __len__(self) -> int:
        return len(self._records)

    def records(self) -> Iterable[ErasureRecord]:
        return self._records.values()

    def insert(self, record: ErasureRecord) -> None:
        self._records[record.original_txid] = record

    def encode(self) -> bytes:
        """Canonical text form, one record per line, sorted by txid.

        Line grammar (single spaces, trailing newline per line):
            txid_hex block_hash_hex redacted_tx_hex entry(,entry)*
            entry = index ":a"                      anyone-can-spend
                  | index ":c:" salt_hex ":" commitment_hex
        Entries are sorted by index.
        """
        lines = []
        for txid in sorted(self._records):
            rec = self._records[txid]
            entries = []
            for index in sorted(rec.erased):
                ie = rec.erased[index]
                if ie.mode == ANYONE_CAN_SPEND:
                    entries.append(f"{index}:a")
                else:
                    entries.append(f"{index}:c:{ie.salt.hex()}:{ie.commitment.hex()}")
            lines.append(
                f"{txid.hex()} {rec.block_hash.hex()} {rec.redacted_tx.encode().hex()} "
                + ",".join(entries)
            )
        return ("\n".join(lines) + "\n").encode() if lines else b""

    @classmethod
    def decode(cls, raw: bytes) -> "ErasureDb":
        db = cls()
        for lineno, line in enumerate(raw.decode().splitlines(), 1):
            if not line.strip():
                continue
            try:
                txid_hex, block_hex, tx_hex, entries_text = line.split(" ")
                record = ErasureRecord(
                    original_txid=hash_from_hex(txid_hex),
                    block_hash=hash_from_hex(block_hex),
                    redacted_tx=Transaction.decode(bytes.fromhex(tx_hex)),
                )
                for entry in entries_text.split(","):
                    parts = entry.split(":")
                    index = int(parts[0])
                    if parts[1] == "a" and len(parts) == 2:
                        record.erased[index] = IndexErasure(ANYONE_CAN_SPEND)
                    elif parts[1] == "c" and len(parts) == 4:
                        salt = bytes.fromhex(parts[2])
                        commitment = bytes.fromhex(parts[3])
                        if len(salt) != SALT_SIZE or len(commitment) != HASH_SIZE:
                            raise ValueError("bad salt or commitment length")
                        record.erased[index] = IndexErasure(HASH_COMMITMENT, salt, commitment)
                    else:
                        raise ValueError(f"bad entry {entry!r}")
            except (ValueError, IndexError) as exc:
                raise ErasureError(f"erasure db line {lineno}: {exc}") from None
            db._records[record.original_txid] = record
        return db


def _redacted_script(original: Script) -> Script:
    """Replacement locking script: payload gone, spendability class kept.

    Provably unspendable outputs (RETURN-first) stay unspendable so they
    keep staying out of every UTXO set; anything else becomes the minimal
    always-true script.
    """
    if original.is_unspendable():
        return Script((Opcode.RETURN,))
    return Script((Opcode.TRUE,))


def redact_transaction(
    tx: Transaction, indices: Iterable[int], mode: ErasureMode
) -> tuple[Transaction, dict[int, IndexErasure]]:
    """Rewrite the given output indices of ``tx``, preserving all values.

    Returns the redacted transaction and the per-index spend metadata.
    In commitment mode every target must currently be a pay-to-hash output.
    """
    targets = sorted(set(indices))
    outputs = list(tx.outputs)
    erased: dict[int, IndexErasure] = {}
    for index in targets:
        if not 0 <= index < len(outputs):
            raise IndexOutOfRange(f"output index {index} of {len(outputs)}")
        original = outputs[index]
        if mode.kind == HASH_COMMITMENT:
            locked_hash = match_pay_to_hash(original.script_pubkey)
            if locked_hash is None:
                raise NotPayToHash(f"output {index} is not a pay-to-hash script")
            commitment = sha256(mode.salt + locked_hash)
            erased[index] = IndexErasure(HASH_COMMITMENT, mode.salt, commitment)
        else:
            erased[index] = IndexErasure(ANYONE_CAN_SPEND)
        outputs[index] = TxOutput(original.value, _redacted_script(original.script_pubkey))
    return Transaction(tx.inputs, tuple(outputs), tx.lock_time), erased


def check_erased_spend(
    record: ErasureRecord, index: int, script_sig: Script, ctx: SignatureContext
) -> str:
    """Judge a spend of an erased output.

    Anyone-can-spend erasures are unverifiable by construction.  Commitment
    erasures pass only if the unlocking script is push-only, its top item
    X hashes through the salted commitment, and the signature below it
    verifies under X.  Anything malformed fails closed.
    """
    erasure = record.erased.get(index)
    if erasure is None:
        raise IndexOutOfRange(f"index {index} not erased in {record.original_txid.hex()}")
    if erasure.mode == ANYONE_CAN_SPEND:
        return CHECK_UNVERIFIABLE
    if not script_sig.is_push_only():
        return CHECK_FAIL
    items = script_sig.push_payloads()
    if len(items) < 2:
        return CHECK_FAIL
    pubkey = items[-1]
    signature = items[-2]
    if sha256(erasure.salt + sha256(pubkey)) != erasure.commitment:
        return CHECK_FAIL
    return CHECK_PASS if ctx.verifier(signature, pubkey, ctx.message) else CHECK_FAIL


@dataclass
class ChainStores:
    """The mutable state bundle an erase operates on."""

    blocks: BlockStore
    undo: UndoStore
    utxo: UtxoSet
    erasures: ErasureDb


@dataclass
class ErasureReceipt:
    txid: bytes
    erased: tuple[int, ...]
    already_erased: tuple[int, ...]
    utxo_rewrites: int
    undo_rewrites: int
    blocks_rewritten: int

    def describe(self) -> str:
        parts = [f"erase {self.txid.hex()}"]
        if self.erased:
            parts.append(f"indices {','.join(map(str, self.erased))}")
        if self.already_erased:
            parts.append(f"already erased {','.join(map(str, self.already_erased))}")
        parts.append(
            f"rewrote {self.blocks_rewritten} block(s), "
            f"{self.utxo_rewrites} utxo entr(ies), {self.undo_rewrites} undo entr(ies)"
        )
        return "; ".join(parts)


def find_transaction(
    store: BlockStore, txid: bytes, prefer: set[bytes] | None = None
) -> tuple[bytes, int, Transaction] | None:
    """Locate ``txid`` in stored block bodies, honoring prior substitutions.

    Returns (block_hash, tx_index, stored_tx).  ``prefer`` narrows ties
    (e.g. to the active chain) when multiple stored blocks contain it.
    """
    hits = []
    for record in store.records():
        if record.body is None:
            continue
        subs = dict(record.substitutions)
        for i, tx in enumerate(record.body.transactions):
            if subs.get(i, tx.txid) == txid:
                hits.append((record.block_hash, i, tx))
                break
    if not hits:
        return None
    if prefer:
        for hit in hits:
            if hit[0] in prefer:
                return hit
    return hits[0]


def erase_outputs(
    stores: ChainStores,
    txid: bytes,
    indices: Iterable[int],
    mode: ErasureMode,
    active_hashes: set[bytes] | None = None,
) -> ErasureReceipt:
    """Erase output payloads of a stored transaction, everywhere they live.

    Rewrites the transaction inside every stored block body containing it,
    any unspent entries for it, and any undo records holding its spent
    outputs, then writes the erasure record.  Idempotent per index: indices
    already erased are reported and left under their original mode.
    """
    requested = sorted(set(indices))
    located = find_transaction(stores.blocks, txid, prefer=active_hashes)
    if located is None:
        raise UnknownTxid(txid.hex())
    block_hash, tx_index, current_tx = located

    existing = stores.erasures.lookup(txid)
    already = tuple(i for i in requested if existing and i in existing.erased)
    fresh = [i for i in requested if not existing or i not in existing.erased]

    if not fresh:
        # Nothing new to remove; leave every store byte-identical.
        return ErasureReceipt(
            txid=txid,
            erased=(),
            already_erased=already,
            utxo_rewrites=0,
            undo_rewrites=0,
            blocks_rewritten=0,
        )

    redacted_tx, new_erased = redact_transaction(current_tx, fresh, mode)

    if existing is None:
        record = ErasureRecord(txid, block_hash, redacted_tx)
    else:
        record = existing
        record.redacted_tx = redacted_tx
    record.erased.update(new_erased)
    stores.erasures.insert(record)

    redacted_by_index = {i: redacted_tx.outputs[i] for i in fresh}

    blocks_rewritten = 0
    for rec in stores.blocks.records():
        if rec.body is None:
            continue
        subs = dict(rec.substitutions)
        for i, tx in enumerate(rec.body.transactions):
            if subs.get(i, tx.txid) != txid:
                continue
            new_txs = list(rec.body.transactions)
            new_txs[i] = redacted_tx
            rec.body = Block(rec.body.header, tuple(new_txs))
            if i not in subs:
                rec.substitutions = rec.substitutions + ((i, txid),)
            blocks_rewritten += 1
            break

    utxo_rewrites = 0
    for index, new_output in redacted_by_index.items():
        outpoint = OutPoint(txid, index)
        entry = stores.utxo.get(outpoint)
        if entry is not None:
            stores.utxo.replace(outpoint, UtxoEntry(new_output, entry.height, entry.is_coinbase))
            utxo_rewrites += 1

    undo_rewrites = 0
    for undo_block_hash, undo in stores.undo.items():
        changed = False
        new_spent = []
        for outpoint, entry in undo.spent:
            if outpoint.txid == txid and outpoint.index in redacted_by_index:
                entry = UtxoEntry(
                    redacted_by_index[outpoint.index], entry.height, entry.is_coinbase
                )
                changed = True
                undo_rewrites += 1
            new_spent.append((outpoint, entry))
        if changed:
            undo.spent = tuple(new_spent)

    return ErasureReceipt(
        txid=txid,
        erased=tuple(fresh),
        already_erased=already,
        utxo_rewrites=utxo_rewrites,
        undo_rewrites=undo_rewrites,
        blocks_rewritten=blocks_rewritten,
    )


# Record exchange between nodes.


@dataclass
class ImportResult:
    imported: int
    conflicts: tuple[bytes, ...]
    unknown_blocks: tuple[bytes, ...]


def export_records(db: ErasureDb, txids: Iterable[bytes] | None = None) -> bytes:
    """Serialize all records, or just the named ones, in the db file format."""
    if txids is None:
        return db.encode()
    subset = ErasureDb()
    for txid in txids:
        record = db.lookup(txid)
        if record is None:
            raise UnknownTxid(txid.hex())
        subset.insert(record)
    return subset.encode()


def import_records(
    db: ErasureDb,
    raw: bytes,
    validate_blocks: set[bytes] | None = None,
) -> ImportResult:
    """Merge serialized records into ``db``; first writer wins.

    A txid already present is a conflict: the existing record is kept and
    the incoming one reported.  With ``validate_blocks`` given, records
    pointing at unknown block hashes are rejected and reported.
    """
    incoming = ErasureDb.decode(raw)
    imported = 0
    conflicts = []
    unknown = []
    for record in incoming.records():
        if validate_blocks is not None and record.block_hash not in validate_blocks:
            unknown.append(record.original_txid)
            continue
        if record.original_txid in db:
            conflicts.append(record.original_txid)
            continue
        db.insert(record)
        imported += 1
    return ImportResult(imported, tuple(conflicts), tuple(unknown))


# Erase-config documents (CLI and bootstrap input).


@dataclass(frozen=True)
class EraseTarget:
    block_hash: bytes
    txid: bytes
    indices: tuple[int, ...]
    mode_kind: str | None = None  # None defers to the caller's default


@dataclass(frozen=True)
class EraseConfig:
    chain: str
    targets: tuple[EraseTarget, ...]


def parse_erase_config(text: str) -> EraseConfig:
    """Parse the JSON erase-config document.

    Shape: {"chain": name, "erase": {block_hash_hex: {txid_hex: spec}}}
    where spec is either a list of output indices or an object
    {"indices": [...], "mode": "anyonecanspend" | "commitment"}.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("chain"), str):
        raise ConfigError('top level must be an object with a "chain" name')
    erase = doc.get("erase")
    if not isinstance(erase, dict):
        raise ConfigError('missing "erase" object')
    targets = []
    for block_hex, txs in erase.items():
        try:
            block_hash = hash_from_hex(block_hex)
        except ValueError as exc:
            raise ConfigError(f"bad block hash {block_hex!r}: {exc}") from None
        if not isinstance(txs, dict):
            raise ConfigError(f"block {block_hex}: expected an object of txids")
        for txid_hex, spec in txs.items():
            try:
                txid = hash_from_hex(txid_hex)
            except ValueError as exc:
                raise ConfigError(f"bad txid {txid_hex!r}: {exc}") from None
            mode_kind = None
            if isinstance(spec, list):
                indices = spec
            elif isinstance(spec, dict):
                indices = spec.get("indices")
                mode_kind = spec.get("mode")
                if mode_kind is not None and mode_kind not in (ANYONE_CAN_SPEND, HASH_COMMITMENT):
                    raise ConfigError(f"txid {txid_hex}: unknown mode {mode_kind!r}")
            else:
                raise ConfigError(f"txid {txid_hex}: expected a list or an object")
            if (
                not isinstance(indices, list)
                or not indices
                or not all(isinstance(i, int) and i >= 0 for i in indices)
            ):
                raise ConfigError(f"txid {txid_hex}: indices must be non-negative integers")
            targets.append(EraseTarget(block_hash, txid, tuple(indices), mode_kind))
    return EraseConfig(doc["chain"], tuple(targets))
