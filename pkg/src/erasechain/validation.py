"""Consensus rules: transaction and block validity, chainstate transitions.

Validation is erasure-aware.  A transaction spending an erased output is
never plain-valid from the mempool's point of view: the best local answer
is "depends on erased data" (commitment-mode erasures can still fail
exactly).  Block validation substitutes redacted stand-ins for recorded
txids before checking, so an erasing node keeps validating the chain.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core.blocks import Block, compute_merkle_root, meets_difficulty
from .core.keys import verify_signature
from .core.params import ChainParams
from .core.script import SignatureContext, eval_script
from .core.tx import OutPoint, Transaction, signing_message
from .erasure import CHECK_FAIL, ErasureDb, check_erased_spend
from .storage import UndoData, UtxoEntry, UtxoSet

# Transaction verdicts.
TX_VALID = "valid"
TX_INVALID = "invalid"
TX_DEPENDS_ON_ERASED = "depends-on-erased"

# Block rejection reasons.
BAD_PREV_HASH = "bad-prev-hash"
BAD_POW = "bad-pow"
BAD_MERKLE_ROOT = "bad-merkle-root"
BAD_TRANSACTION = "bad-transaction"


@dataclass(frozen=True)
class TxValidity:
    verdict: str
    reason: str | None = None
    erased_outpoints: tuple[OutPoint, ...] = ()

    @classmethod
    def valid(cls) -> "TxValidity":
        return cls(TX_VALID)

    @classmethod
    def invalid(cls, reason: str) -> "TxValidity":
        return cls(TX_INVALID, reason=reason)

    @classmethod
    def depends_on_erased(cls, outpoints: tuple[OutPoint, ...]) -> "TxValidity":
        return cls(TX_DEPENDS_ON_ERASED, erased_outpoints=outpoints)

    @property
    def is_valid(self) -> bool:
        return self.verdict == TX_VALID

    @property
    def is_invalid(self) -> bool:
        return self.verdict == TX_INVALID


@dataclass(frozen=True)
class BlockValidity:
    ok: bool
    reason: str | None = None
    detail: str | None = None
    tx_index: int | None = None

    @classmethod
    def valid(cls) -> "BlockValidity":
        return cls(True)

    @classmethod
    def invalid(cls, reason: str, detail: str | None = None, tx_index: int | None = None) -> "BlockValidity":
        return cls(False, reason, detail, tx_index)


def validate_transaction(
    tx: Transaction,
    utxo: UtxoSet,
    erasure_db: ErasureDb | None,
    height: int,
    params: ChainParams,
    verifier=verify_signature,
    check_scripts: bool = True,
) -> TxValidity:
    """Full check of a non-coinbase transaction against a chain state.

    ``height`` is the height the transaction would be confirmed at; it
    gates lock times and coinbase maturity.  Spends of erased outputs that
    pass their per-mode check yield a depends-on-erased verdict, carrying
    the erased outpoints.  ``check_scripts=False`` keeps only the
    structural and value rules; a non-validating miner runs this way.
    """
    if tx.is_coinbase():
        raise ValueError("coinbase transactions are validated as part of a block")
    if not tx.inputs:
        return TxValidity.invalid("no inputs")
    if not tx.outputs:
        return TxValidity.invalid("no outputs")
    if tx.lock_time > height:
        return TxValidity.invalid(f"lock time {tx.lock_time} not reached at height {height}")
    if len({txin.outpoint for txin in tx.inputs}) != len(tx.inputs):
        return TxValidity.invalid("duplicate input")
    for i, txout in enumerate(tx.outputs):
        if txout.value > params.max_money:
            return TxValidity.invalid(f"output {i} exceeds maximum money")

    ctx = SignatureContext(signing_message(tx), verifier)
    erased_hits: list[OutPoint] = []
    total_in = 0
    for txin in tx.inputs:
        outpoint = txin.outpoint
        entry = utxo.get(outpoint)
        if entry is None:
            return TxValidity.invalid(f"missing or spent outpoint {outpoint!r}")
        if entry.is_coinbase and height - entry.height < params.coinbase_maturity:
            return TxValidity.invalid(f"immature coinbase spend of {outpoint!r}")
        total_in += entry.output.value

        record = erasure_db.lookup(txin.prev_txid) if erasure_db is not None else None
        if record is not None and txin.prev_index in record.erased:
            # The stored locking script is the redacted one; run it, then
            # apply the mode-specific check on top.
            if check_scripts:
                if not eval_script(txin.script_sig, entry.output.script_pubkey, ctx):
                    return TxValidity.invalid(f"script rejected spend of {outpoint!r}")
                if check_erased_spend(record, txin.prev_index, txin.script_sig, ctx) == CHECK_FAIL:
                    return TxValidity.invalid(f"erased-output commitment mismatch at {outpoint!r}")
            erased_hits.append(outpoint)
        elif check_scripts:
            if not eval_script(txin.script_sig, entry.output.script_pubkey, ctx):
                return TxValidity.invalid(f"script rejected spend of {outpoint!r}")

    total_out = sum(txout.value for txout in tx.outputs)
    if total_out > total_in:
        return TxValidity.invalid(f"outputs {total_out} exceed inputs {total_in}")
    if erased_hits:
        return TxValidity.depends_on_erased(tuple(erased_hits))
    return TxValidity.valid()


def resolve_block_transactions(
    block: Block, erasure_db: ErasureDb | None
) -> list[tuple[bytes, Transaction]]:
    """Pair each transaction with its original txid, swapping in redactions.

    For a freshly received block the txids are computed; a txid with an
    erasure record is replaced by its redacted stand-in (same txid kept,
    since the record is keyed by the original).  Blocks loaded from the
    store carry substitution metadata instead; see BlockRecord.
    """
    resolved = []
    for tx in block.transactions:
        txid = tx.txid
        record = erasure_db.lookup(txid) if erasure_db is not None else None
        if record is not None:
            resolved.append((txid, record.redacted_tx))
        else:
            resolved.append((txid, tx))
    return resolved


def validate_block(
    block: Block,
    parent_hash: bytes,
    parent_height: int,
    utxo: UtxoSet,
    erasure_db: ErasureDb | None,
    params: ChainParams,
    verifier=verify_signature,
    resolved: list[tuple[bytes, Transaction]] | None = None,
    check_scripts: bool = True,
) -> BlockValidity:
    """Contextual block check against its parent's chain state.

    The merkle root is checked over original txids, so it holds even when
    redacted stand-ins are validated in place of erased transactions.
    ``resolved`` lets a caller pass pre-substituted pairs (stored blocks);
    otherwise substitution happens here via ``erasure_db``.
    """
    header = block.header
    if header.prev_block_hash != parent_hash:
        return BlockValidity.invalid(BAD_PREV_HASH)
    if not meets_difficulty(block.block_hash, params.difficulty):
        return BlockValidity.invalid(BAD_POW)
    if not block.transactions:
        return BlockValidity.invalid(BAD_TRANSACTION, "empty block", 0)

    if resolved is None:
        resolved = resolve_block_transactions(block, erasure_db)
    if compute_merkle_root([txid for txid, _ in resolved]) != header.merkle_root:
        return BlockValidity.invalid(BAD_MERKLE_ROOT)

    height = parent_height + 1
    coinbase = resolved[0][1]
    if not coinbase.is_coinbase():
        return BlockValidity.invalid(BAD_TRANSACTION, "first transaction not a coinbase", 0)
    if sum(o.value for o in coinbase.outputs) > params.block_reward:
        return BlockValidity.invalid(BAD_TRANSACTION, "coinbase claims more than the reward", 0)
    for o in coinbase.outputs:
        if o.value > params.max_money:
            return BlockValidity.invalid(BAD_TRANSACTION, "coinbase output exceeds maximum money", 0)

    working = utxo.copy()
    apply_transaction(working, resolved[0][0], coinbase, height)
    for i, (txid, tx) in enumerate(resolved[1:], start=1):
        if tx.is_coinbase():
            return BlockValidity.invalid(BAD_TRANSACTION, "extra coinbase", i)
        # A redacted stand-in cannot carry proofs for its own inputs: its
        # signatures cover the original outputs.  The record vouches for
        # it (mined, buried, and validated before erasure), so only the
        # structural and value rules apply to it.
        tx_checks = check_scripts and (erasure_db is None or txid not in erasure_db)
        verdict = validate_transaction(
            tx, working, erasure_db, height, params, verifier, tx_checks
        )
        if verdict.is_invalid:
            return BlockValidity.invalid(BAD_TRANSACTION, verdict.reason, i)
        apply_transaction(working, txid, tx, height)
    return BlockValidity.valid()


def apply_transaction(utxo: UtxoSet, txid: bytes, tx: Transaction, height: int) -> UndoData:
    """Apply one resolved transaction in place; returns its undo slice."""
    spent = []
    if not tx.is_coinbase():
        for txin in tx.inputs:
            spent.append((txin.outpoint, utxo.remove(txin.outpoint)))
    created = []
    is_coinbase = tx.is_coinbase()
    for index, txout in enumerate(tx.outputs):
        if txout.script_pubkey.is_unspendable():
            continue
        outpoint = OutPoint(txid, index)
        utxo.add(outpoint, UtxoEntry(txout, height, is_coinbase))
        created.append(outpoint)
    return UndoData(tuple(spent), tuple(created))


def apply_block(
    utxo: UtxoSet,
    block: Block,
    height: int,
    erasure_db: ErasureDb | None = None,
    resolved: list[tuple[bytes, Transaction]] | None = None,
) -> tuple[UtxoSet, UndoData]:
    """Connect an already-validated block; returns (new chain state, undo).

    The input set is not mutated.  Provably unspendable outputs never enter
    the set.
    """
    if resolved is None:
        resolved = resolve_block_transactions(block, erasure_db)
    working = utxo.copy()
    all_spent: list[tuple[OutPoint, UtxoEntry]] = []
    all_created: list[OutPoint] = []
    for txid, tx in resolved:
        undo = apply_transaction(working, txid, tx, height)
        all_spent.extend(undo.spent)
        all_created.extend(undo.created)
    return working, UndoData(tuple(all_spent), tuple(all_created))


def undo_block(utxo: UtxoSet, undo: UndoData) -> UtxoSet:
    """Disconnect a block: restore what it spent, delete what it created."""
    working = utxo.copy()
    for outpoint in undo.created:
        working.remove(outpoint)
    for outpoint, entry in undo.spent:
        working.add(outpoint, entry)
    return working
