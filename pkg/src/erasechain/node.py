"""One validating node: mempool policy, fork choice, and the erasure workflow.

The handling rules for announced data follow two principles.  First, an
unconfirmed transaction that depends on locally erased data is dropped and
never relayed; the mempool only ever holds transactions this node checked
completely.  Second, a mined spend of an erased output is accepted when its
block connects: inclusion under proof of work stands in for the part of the
check the node can no longer perform (and with commitment-mode erasure the
check is still exact).
"""

from __future__ import annotations

import dataclasses
import json
import os
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Iterable

from .core.blocks import Block, compute_merkle_root, meets_difficulty, mine_block
from .core.hashing import ZERO_HASH
from .core.keys import KeyPair, verify_signature
from .core.params import (
    ChainParams,
    build_genesis,
    coinbase_transaction,
    params_from_doc,
    params_to_doc,
)
from .core.tx import OutPoint, Transaction, pay_to_hash_output
from .erasure import (
    ChainStores,
    EraseConfig,
    ErasureDb,
    ErasureError,
    ErasureMode,
    ErasureReceipt,
    HASH_COMMITMENT,
    ImportResult,
    UnknownTxid,
    erase_outputs,
    import_records,
)
from .storage import (
    BlockRecord,
    BlockStore,
    DataDir,
    UndoStore,
    UtxoSet,
    prune_block_bodies,
    write_file,
    CHAINSTATE_MAGIC,
)
from .core import codec
from .validation import (
    BAD_MERKLE_ROOT,
    BAD_POW,
    BlockValidity,
    TX_DEPENDS_ON_ERASED,
    apply_block,
    apply_transaction,
    resolve_block_transactions,
    undo_block,
    validate_block,
    validate_transaction,
)

MAX_ORPHANS = 64

# handle_transaction outcomes.
TX_ACCEPTED = "accepted"
TX_DUPLICATE = "duplicate"
TX_DROPPED_ERASED = "dropped-erased"
TX_DROPPED_DEPENDS = "dropped-depends-on-erased"
TX_DROPPED_INVALID = "dropped-invalid"

# handle_block outcomes.
BLOCK_EXTENDED = "extended"
BLOCK_REORGED = "reorged"
BLOCK_SIDE = "stored-side-chain"
BLOCK_REJECTED = "rejected"
BLOCK_ORPHANED = "orphaned"
BLOCK_KNOWN = "already-known"


@dataclass(frozen=True)
class TxResult:
    outcome: str
    reason: str | None = None
    erased_outpoints: tuple[OutPoint, ...] = ()


@dataclass(frozen=True)
class BlockResult:
    outcome: str
    reason: str | None = None
    # Blocks disconnected when this block triggered a reorg.
    depth: int = 0


@dataclass(frozen=True)
class HeaderInfo:
    height: int
    work: int
    prev: bytes


@dataclass(frozen=True)
class NodeConfig:
    params: ChainParams = ChainParams()
    # Burial depth below which erasure refuses to run, and at which raw
    # block bodies may be pruned.
    maturity: int = 300
    is_miner: bool = False
    # A rogue node models the non-validating miner: it skips script and
    # signature checks when accepting blocks and includes arbitrary spends
    # in blocks it mines, bypassing the mempool rule that would drop them.
    rogue: bool = False
    confirmations_required: int = 6


@dataclass(frozen=True)
class LogEvent:
    step: int
    node_id: int
    event: str
    subject: str
    detail: str = ""

    def line(self) -> str:
        return f"{self.step} n{self.node_id} {self.event} {self.subject} {self.detail}".rstrip()


# Bootstrap modes for syncing a fresh node against a chain that others may
# already have erased from.


@dataclass(frozen=True)
class ValidateThenErase:
    """Validate each block normally, then erase configured targets on sight."""

    config: EraseConfig


@dataclass(frozen=True)
class PreSeeded:
    """Install erasure records first; redacted stand-ins validate in place."""

    records: bytes
    validate_after: bool = True


class NodeState:
    """Complete state of one node; all handlers are deterministic."""

    def __init__(
        self,
        node_id: int = 0,
        config: NodeConfig | None = None,
        miner_key: KeyPair | None = None,
        salt_source: Callable[[], bytes] | None = None,
    ):
        self.node_id = node_id
        self.config = config or NodeConfig()
        self.params = self.config.params
        self.stores = ChainStores(BlockStore(), UndoStore(), UtxoSet(), ErasureDb())
        self.headers: dict[bytes, HeaderInfo] = {}
        self.invalid: dict[bytes, str] = {}
        self.by_height: dict[int, bytes] = {}
        # Original txids on the active chain; may lack pruned heights after
        # a reload, which only weakens duplicate detection, not validation.
        self.chain_txids: dict[bytes, int] = {}
        self.height_txids: dict[int, tuple[bytes, ...]] = {}
        self.mempool: dict[bytes, Transaction] = {}
        self.mempool_spends: dict[OutPoint, bytes] = {}
        self.orphans: OrderedDict[bytes, Block] = OrderedDict()
        self.pending_erasures: dict[bytes, tuple[tuple[int, ...], str | None]] = {}
        self.miner_key = miner_key or KeyPair.from_int(node_id + 1)
        self.salt_source = salt_source or (lambda: os.urandom(16))
        self.step = 0
        self.log: list[LogEvent] = []
        self.tip_hash = b""
        self._connect_genesis(build_genesis(self.params))

    # Small helpers.

    @property
    def tip_height(self) -> int:
        return self.headers[self.tip_hash].height

    @property
    def tip_work(self) -> int:
        return self.headers[self.tip_hash].work

    def _block_work(self) -> int:
        return 1 << self.params.difficulty

    def _log(self, event: str, subject: bytes, detail: str = "") -> None:
        self.log.append(LogEvent(self.step, self.node_id, event, subject.hex()[:16], detail))

    def log_lines(self) -> list[str]:
        return [e.line() for e in self.log]

    def confirmations(self, txid: bytes) -> int:
        """0 if unconfirmed; otherwise blocks from its height to the tip, inclusive."""
        height = self.chain_txids.get(txid)
        if height is None:
            return 0
        return self.tip_height - height + 1

    def _connect_genesis(self, genesis: Block) -> None:
        resolved = resolve_block_transactions(genesis, None)
        utxo, undo = apply_block(self.stores.utxo, genesis, 0, resolved=resolved)
        self.stores.utxo = utxo
        self.stores.undo.put(genesis.block_hash, undo)
        self.stores.blocks.put(
            BlockRecord(genesis.block_hash, 0, genesis.header, genesis, ())
        )
        self.headers[genesis.block_hash] = HeaderInfo(0, self._block_work(), ZERO_HASH)
        self.tip_hash = genesis.block_hash
        self.by_height[0] = genesis.block_hash
        txids = tuple(txid for txid, _ in resolved)
        self.height_txids[0] = txids
        for txid in txids:
            self.chain_txids[txid] = 0

    # Announcement gate.

    def should_request(self, kind: str, subject: bytes) -> bool:
        """Whether an announced hash is worth fetching.

        Never re-fetch a transaction whose txid is in the erasure database,
        anything already held, or a block proven invalid.
        """
        if kind == "tx":
            if subject in self.stores.erasures:
                return False
            return subject not in self.mempool and subject not in self.chain_txids
        if kind == "block":
            return (
                subject not in self.headers
                and subject not in self.invalid
                and subject not in self.orphans
            )
        raise ValueError(f"unknown announcement kind {kind!r}")

    # Transaction intake.

    def handle_transaction(self, tx: Transaction) -> TxResult:
        txid = tx.txid
        if self.stores.erasures.lookup(txid) is not None:
            self._log("tx", txid, "dropped: erased locally")
            return TxResult(TX_DROPPED_ERASED)
        if txid in self.mempool or txid in self.chain_txids:
            return TxResult(TX_DUPLICATE)
        if tx.is_coinbase():
            self._log("tx", txid, "dropped: coinbase outside a block")
            return TxResult(TX_DROPPED_INVALID, "coinbase outside a block")
        for txin in tx.inputs:
            holder = self.mempool_spends.get(txin.outpoint)
            if holder is not None and holder != txid:
                self._log("tx", txid, "dropped: conflicts with mempool")
                return TxResult(TX_DROPPED_INVALID, "conflicts with mempool")
        verdict = validate_transaction(
            tx, self.stores.utxo, self.stores.erasures, self.tip_height + 1, self.params
        )
        if verdict.verdict == TX_DEPENDS_ON_ERASED:
            # Unconfirmed and resting on erased data: drop, never relay.
            self._log("tx", txid, "dropped: depends on erased data")
            return TxResult(TX_DROPPED_DEPENDS, erased_outpoints=verdict.erased_outpoints)
        if verdict.is_invalid:
            self._log("tx", txid, f"dropped: {verdict.reason}")
            return TxResult(TX_DROPPED_INVALID, verdict.reason)
        self.mempool[txid] = tx
        for txin in tx.inputs:
            self.mempool_spends[txin.outpoint] = txid
        self._log("tx", txid, "accepted to mempool")
        return TxResult(TX_ACCEPTED)

    def _remove_from_mempool(self, txid: bytes) -> None:
        tx = self.mempool.pop(txid, None)
        if tx is None:
            return
        for txin in tx.inputs:
            if self.mempool_spends.get(txin.outpoint) == txid:
                del self.mempool_spends[txin.outpoint]

    def _refresh_mempool(self) -> None:
        """Re-judge every pooled transaction against the current tip."""
        for txid, tx in list(self.mempool.items()):
            if txid in self.chain_txids:
                self._remove_from_mempool(txid)
                continue
            verdict = validate_transaction(
                tx, self.stores.utxo, self.stores.erasures, self.tip_height + 1, self.params
            )
            if verdict.verdict == TX_DEPENDS_ON_ERASED:
                self._remove_from_mempool(txid)
                self._log("tx", txid, "evicted: depends on erased data")
            elif verdict.is_invalid:
                self._remove_from_mempool(txid)
                self._log("tx", txid, f"evicted: {verdict.reason}")

    # Block intake.

    def handle_block(self, block: Block) -> BlockResult:
        result = self._handle_block_inner(block)
        if result.outcome in (BLOCK_EXTENDED, BLOCK_REORGED, BLOCK_SIDE):
            self._drain_orphans()
        return result

    def _handle_block_inner(self, block: Block) -> BlockResult:
        block_hash = block.block_hash
        if block_hash in self.headers:
            return BlockResult(BLOCK_KNOWN)
        if block_hash in self.invalid:
            return BlockResult(BLOCK_REJECTED, self.invalid[block_hash])
        parent = self.headers.get(block.header.prev_block_hash)
        if parent is None:
            self._stash_orphan(block)
            self._log("block", block_hash, "orphaned: unknown parent")
            return BlockResult(BLOCK_ORPHANED)
        return self._accept_block(block, parent)

    def _stash_orphan(self, block: Block) -> None:
        self.orphans[block.block_hash] = block
        while len(self.orphans) > MAX_ORPHANS:
            self.orphans.popitem(last=False)

    def _drain_orphans(self) -> None:
        progress = True
        while progress:
            progress = False
            for orphan_hash, orphan in list(self.orphans.items()):
                if orphan.header.prev_block_hash in self.headers:
                    del self.orphans[orphan_hash]
                    self._handle_block_inner(orphan)
                    progress = True

    def _accept_block(self, block: Block, parent: HeaderInfo) -> BlockResult:
        block_hash = block.block_hash
        height = parent.height + 1
        work = parent.work + self._block_work()

        # Context-free checks happen for every block; full contextual
        # validation waits until the block is about to join the active chain.
        if not meets_difficulty(block_hash, self.params.difficulty):
            self.invalid[block_hash] = BAD_POW
            self._log("block", block_hash, "rejected: bad-pow")
            return BlockResult(BLOCK_REJECTED, BAD_POW)
        resolved = resolve_block_transactions(block, self.stores.erasures)
        if compute_merkle_root([txid for txid, _ in resolved]) != block.header.merkle_root:
            # The body does not match the header it came with.  Another
            # peer may serve a usable copy, so the hash is not poisoned.
            self._log("block", block_hash, "rejected: bad-merkle-root")
            return BlockResult(BLOCK_REJECTED, BAD_MERKLE_ROOT)

        if block.header.prev_block_hash == self.tip_hash:
            verdict = validate_block(
                block,
                self.tip_hash,
                parent.height,
                self.stores.utxo,
                self.stores.erasures,
                self.params,
                resolved=resolved,
                check_scripts=not self.config.rogue,
            )
            if not verdict.ok:
                self.invalid[block_hash] = verdict.reason
                detail = f"rejected: {verdict.reason}"
                if verdict.detail:
                    detail += f" ({verdict.detail} at tx {verdict.tx_index})"
                self._log("block", block_hash, detail)
                return BlockResult(BLOCK_REJECTED, verdict.reason)
            self._connect(block, resolved, height, work)
            self._log("block", block_hash, f"extended chain to height {height}")
            return BlockResult(BLOCK_EXTENDED)

        # Side chain: keep the (substituted) body, then see if it now wins.
        self._store_side_block(block, resolved, height, work)
        if work > self.tip_work:
            return self._reorg_to(block_hash)
        self._log("block", block_hash, f"stored side block at height {height}")
        return BlockResult(BLOCK_SIDE)

    def _substitutions(self, block: Block, resolved) -> tuple[tuple[int, bytes], ...]:
        return tuple(
            (i, txid)
            for i, (txid, tx) in enumerate(resolved)
            if txid != tx.txid
        )

    def _store_side_block(self, block: Block, resolved, height: int, work: int) -> None:
        subs = self._substitutions(block, resolved)
        body = Block(block.header, tuple(tx for _, tx in resolved))
        self.stores.blocks.put(BlockRecord(block.block_hash, height, block.header, body, subs))
        self.headers[block.block_hash] = HeaderInfo(height, work, block.header.prev_block_hash)

    def _connect(self, block: Block, resolved, height: int, work: int) -> None:
        """Attach a validated block to the tip and update every index."""
        block_hash = block.block_hash
        utxo, undo = apply_block(self.stores.utxo, block, height, resolved=resolved)
        self.stores.utxo = utxo
        self.stores.undo.put(block_hash, undo)
        subs = self._substitutions(block, resolved)
        body = Block(block.header, tuple(tx for _, tx in resolved))
        self.stores.blocks.put(BlockRecord(block_hash, height, block.header, body, subs))
        self.headers[block_hash] = HeaderInfo(height, work, block.header.prev_block_hash)
        self._index_connected(block_hash, height, [txid for txid, _ in resolved])
        self._after_tip_change([txid for txid, _ in resolved])

    def _index_connected(self, block_hash: bytes, height: int, txids: list[bytes]) -> None:
        self.by_height[height] = block_hash
        self.tip_hash = block_hash
        self.height_txids[height] = tuple(txids)
        for txid in txids:
            self.chain_txids[txid] = height

    def _after_tip_change(self, mined_txids: list[bytes]) -> None:
        for txid in mined_txids:
            self._remove_from_mempool(txid)
        self._refresh_mempool()
        self._run_pending_erasures(mined_txids)

    def _run_pending_erasures(self, mined_txids: list[bytes]) -> None:
        for txid in mined_txids:
            target = self.pending_erasures.pop(txid, None)
            if target is None:
                continue
            indices, mode_kind = target
            if mode_kind == HASH_COMMITMENT:
                mode = ErasureMode.commitment(self.salt_source())
            else:
                mode = ErasureMode.anyone_can_spend()
            self.erase(txid, indices, mode, enforce_depth=False)

    def _disconnect_tip(self) -> bytes:
        """Undo the active tip; returns the disconnected block's hash."""
        block_hash = self.tip_hash
        info = self.headers[block_hash]
        undo = self.stores.undo.get(block_hash)
        if undo is None:
            raise RuntimeError(f"no undo data for active block {block_hash.hex()}")
        self.stores.utxo = undo_block(self.stores.utxo, undo)
        del self.by_height[info.height]
        for txid in self.height_txids.pop(info.height, ()):
            self.chain_txids.pop(txid, None)
        self.tip_hash = info.prev
        return block_hash

    def _resolved_from_record(self, record: BlockRecord) -> list[tuple[bytes, Transaction]]:
        subs = dict(record.substitutions)
        return [
            (subs.get(i, tx.txid), tx)
            for i, tx in enumerate(record.body.transactions)
        ]

    def _connect_stored(self, record: BlockRecord, validate: bool) -> BlockValidity:
        resolved = self._resolved_from_record(record)
        if validate:
            verdict = validate_block(
                record.body,
                record.header.prev_block_hash,
                record.height - 1,
                self.stores.utxo,
                self.stores.erasures,
                self.params,
                resolved=resolved,
                check_scripts=not self.config.rogue,
            )
            if not verdict.ok:
                return verdict
        utxo, undo = apply_block(self.stores.utxo, record.body, record.height, resolved=resolved)
        self.stores.utxo = utxo
        self.stores.undo.put(record.block_hash, undo)
        self._index_connected(record.block_hash, record.height, [t for t, _ in resolved])
        return BlockValidity.valid()

    def _reorg_to(self, target_hash: bytes) -> BlockResult:
        """Switch the active chain to the branch ending at ``target_hash``."""
        branch: list[bytes] = []
        cursor = target_hash
        while self.by_height.get(self.headers[cursor].height) != cursor:
            branch.append(cursor)
            cursor = self.headers[cursor].prev
        branch.reverse()

        undone: list[bytes] = []
        while self.tip_hash != cursor:
            undone.append(self._disconnect_tip())
        depth = len(undone)

        connected: list[bytes] = []
        failed: str | None = None
        for block_hash in branch:
            record = self.stores.blocks.get(block_hash)
            if record is None or record.body is None:
                failed = "missing block body"
                break
            verdict = self._connect_stored(record, validate=True)
            if not verdict.ok:
                self.invalid[block_hash] = verdict.reason
                self._log("block", block_hash, f"rejected during reorg: {verdict.reason}")
                failed = verdict.reason
                break
            connected.append(block_hash)

        if failed is not None:
            # Roll back to the original chain; it was fully validated before.
            while self.tip_hash != cursor:
                self._disconnect_tip()
            for block_hash in reversed(undone):
                record = self.stores.blocks.get(block_hash)
                self._connect_stored(record, validate=False)
            self._after_tip_change([])
            # Unwind headers of the failed branch so it cannot win again.
            for block_hash in branch:
                if block_hash not in self.invalid:
                    self.invalid[block_hash] = "descends from invalid block"
                self.headers.pop(block_hash, None)
            return BlockResult(BLOCK_REJECTED, failed)

        # Old branch transactions go back through normal intake.
        reinstated: list[Transaction] = []
        for block_hash in undone:
            record = self.stores.blocks.get(block_hash)
            if record is not None and record.body is not None:
                for txid, tx in self._resolved_from_record(record):
                    if not tx.is_coinbase() and txid not in self.chain_txids:
                        reinstated.append(tx)
        self._after_tip_change([])
        for tx in reinstated:
            self.handle_transaction(tx)
        self._log(
            "block",
            target_hash,
            f"reorged: disconnected {depth}, now at height {self.tip_height}",
        )
        return BlockResult(BLOCK_REORGED, depth=depth)

    # Queries.

    def get_block(self, block_hash: bytes) -> Block | None:
        record = self.stores.blocks.get(block_hash)
        return record.body if record else None

    def serve_block(self, block_hash: bytes) -> bytes | None:
        """Stored encoding of a block; redacted stand-ins, never originals."""
        record = self.stores.blocks.get(block_hash)
        if record is None or record.body is None:
            return None
        return record.body.encode()

    def get_transaction(self, txid: bytes) -> Transaction | None:
        """Local lookup by original txid; erased data never comes back."""
        record = self.stores.erasures.lookup(txid)
        if record is not None:
            return record.redacted_tx
        if txid in self.mempool:
            return self.mempool[txid]
        height = self.chain_txids.get(txid)
        if height is not None:
            block_record = self.stores.blocks.get(self.by_height[height])
            if block_record is not None and block_record.body is not None:
                for resolved_txid, tx in self._resolved_from_record(block_record):
                    if resolved_txid == txid:
                        return tx
        return None

    # Mining.

    def build_block_template(self) -> list[Transaction]:
        """Mempool transactions that validate in order against the tip."""
        height = self.tip_height + 1
        working = self.stores.utxo.copy()
        chosen: list[Transaction] = []
        for txid, tx in self.mempool.items():
            verdict = validate_transaction(
                tx, working, self.stores.erasures, height, self.params
            )
            if verdict.is_valid:
                chosen.append(tx)
                apply_transaction(working, txid, tx, height)
        return chosen

    def mine(self, time: int, extra_txs: Iterable[Transaction] = ()) -> tuple[Block, BlockResult]:
        """Assemble and mine one block on the tip, then process it locally.

        ``extra_txs`` are appended after the mempool template without going
        through mempool policy: this is how a rogue miner smuggles in its
        own spends of erased outputs.
        """
        height = self.tip_height + 1
        coinbase = coinbase_transaction(
            height,
            (pay_to_hash_output(self.miner_key.pubkey_hash, self.params.block_reward),),
            tag=b"n%d" % self.node_id,
        )
        txs = [coinbase] + self.build_block_template() + list(extra_txs)
        block = mine_block(self.tip_hash, txs, self.params.difficulty, time)
        result = self.handle_block(block)
        return block, result

    # Erasure.

    def erase(
        self,
        txid: bytes,
        indices: Iterable[int],
        mode: ErasureMode | str,
        enforce_depth: bool = True,
    ) -> ErasureReceipt:
        """Erase output payloads of a confirmed transaction, then sweep the
        mempool so nothing unconfirmed keeps depending on them.

        ``mode`` may be a bare kind string; a commitment salt then comes
        from the node's salt source.
        """
        if isinstance(mode, str):
            if mode == HASH_COMMITMENT:
                mode = ErasureMode.commitment(self.salt_source())
            else:
                mode = ErasureMode(mode)
        if enforce_depth:
            height = self.chain_txids.get(txid)
            if height is None:
                raise UnknownTxid(f"{txid.hex()} is not on the active chain")
            depth = self.tip_height - height
            if depth < self.config.maturity:
                raise ErasureError(
                    f"burial depth {depth} is below maturity {self.config.maturity}"
                )
        receipt = erase_outputs(
            self.stores, txid, indices, mode, active_hashes=set(self.by_height.values())
        )
        self._refresh_mempool()
        self._log("erase", txid, receipt.describe())
        return receipt

    def import_erasures(self, raw: bytes, validate: bool = True) -> ImportResult:
        known = set(self.headers) if validate else None
        result = import_records(self.stores.erasures, raw, validate_blocks=known)
        self._log(
            "erasure-import",
            b"",
            f"imported {result.imported}, conflicts {len(result.conflicts)}, "
            f"unknown blocks {len(result.unknown_blocks)}",
        )
        return result

    def prune(self) -> int:
        """Drop raw bodies buried at least ``maturity`` below the tip."""
        return prune_block_bodies(self.stores.blocks, self.tip_height, self.config.maturity)

    # Persistence.

    def save(self, datadir: DataDir) -> None:
        datadir.ensure_layout()
        write_file(datadir.blocks_path, self.stores.blocks.encode())
        write_file(datadir.undo_path, self.stores.undo.encode())
        write_file(
            datadir.chainstate_path,
            CHAINSTATE_MAGIC + self.tip_hash + self.stores.utxo.encode(),
        )
        write_file(datadir.erasure_path, self.stores.erasures.encode())
        write_file(
            datadir.params_path,
            (json.dumps(params_to_doc(self.params), sort_keys=True, indent=2) + "\n").encode(),
        )

    @classmethod
    def load(cls, datadir: DataDir, config: NodeConfig | None = None) -> "NodeState":
        """Rebuild a node from its datadir.

        Chain parameters come from the datadir itself; headers and chain
        indexes are reconstructed by walking records back from the persisted
        tip.  The mempool starts empty.
        """
        config = config or NodeConfig()
        if os.path.exists(datadir.params_path):
            with open(datadir.params_path) as fh:
                config = dataclasses.replace(config, params=params_from_doc(json.load(fh)))
        node = cls(0, config)
        with open(datadir.blocks_path, "rb") as fh:
            node.stores.blocks = BlockStore.decode(fh.read())
        with open(datadir.undo_path, "rb") as fh:
            node.stores.undo = UndoStore.decode(fh.read())
        with open(datadir.chainstate_path, "rb") as fh:
            raw = fh.read()
        if raw[:4] != CHAINSTATE_MAGIC:
            raise codec.DecodeError("bad chainstate magic")
        tip_hash = raw[4:36]
        node.stores.utxo = UtxoSet.decode(raw[36:])
        if os.path.exists(datadir.erasure_path):
            with open(datadir.erasure_path, "rb") as fh:
                node.stores.erasures = ErasureDb.decode(fh.read())

        genesis_hash = build_genesis(node.params).block_hash
        if genesis_hash not in node.stores.blocks:
            raise ValueError("datadir does not contain this chain's genesis")
        node.headers = {}
        unit = node._block_work()
        for record in node.stores.blocks.records():
            node.headers[record.block_hash] = HeaderInfo(
                record.height, (record.height + 1) * unit, record.header.prev_block_hash
            )
        node.tip_hash = tip_hash
        node.by_height = {}
        node.chain_txids = {}
        node.height_txids = {}
        cursor = tip_hash
        while True:
            info = node.headers[cursor]
            node.by_height[info.height] = cursor
            record = node.stores.blocks.get(cursor)
            txids = record.resolved_txids()
            if txids is not None:
                node.height_txids[info.height] = tuple(txids)
                for txid in txids:
                    node.chain_txids[txid] = info.height
            if cursor == genesis_hash:
                break
            cursor = info.prev
        return node


def bootstrap(
    node: NodeState,
    blocks: Iterable[Block],
    mode: ValidateThenErase | PreSeeded | None = None,
) -> list[BlockResult]:
    """Feed a block sequence to a fresh node under one of the sync modes.

    Plain (mode None): validate and store everything.
    ValidateThenErase: same, but erase configured targets the moment their
    block connects.
    PreSeeded: install erasure records up front; blocks containing recorded
    txids validate via their redacted stand-ins, so the original payloads
    never touch this node's stores.
    """
    if node.tip_height != 0:
        raise ValueError("bootstrap requires a freshly initialized node")
    if isinstance(mode, PreSeeded):
        import_records(node.stores.erasures, mode.records)
    elif isinstance(mode, ValidateThenErase):
        for target in mode.config.targets:
            node.pending_erasures[target.txid] = (target.indices, target.mode_kind)
    results = [node.handle_block(block) for block in blocks]
    if isinstance(mode, PreSeeded) and mode.validate_after:
        for record in node.stores.erasures.records():
            if record.block_hash not in node.headers:
                node._log(
                    "erasure-import",
                    record.original_txid,
                    "warning: record names an unknown block",
                )
    return results
