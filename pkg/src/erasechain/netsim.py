"""Deterministic multi-node network simulation.

A scenario is a fully explicit JSON document: seeded RNG, topology with
per-edge latencies, a precomputed miner schedule, injected transactions,
rogue spends, and timed erasures.  Running the same scenario twice yields
byte-identical reports.

Event kinds are exactly MineAttempt, DeliverTx, DeliverBlock, and EraseAt.
Within a tick, events run in insertion order (injections, then erasures,
then mine attempts, then deliveries as they were scheduled).
"""

from __future__ import annotations

import heapq
import json
import random
from dataclasses import dataclass, field

from .core.blocks import Block
from .core.hashing import sha256
from .core.params import ChainParams, params_from_doc, params_to_doc
from .core.script import Script
from .core.tx import Transaction, TxOutput
from .core.codec import DecodeError
from .erasure import ANYONE_CAN_SPEND, HASH_COMMITMENT, ErasureMode
from .node import (
    BLOCK_EXTENDED,
    BLOCK_REORGED,
    BLOCK_SIDE,
    NodeConfig,
    NodeState,
    TX_ACCEPTED,
)

MINE_ATTEMPT = "MineAttempt"
DELIVER_TX = "DeliverTx"
DELIVER_BLOCK = "DeliverBlock"
ERASE_AT = "EraseAt"

# Rogue-spend outcome leaves.
LEAF_DISCARDED = "discarded-everywhere"
LEAF_REORGED = "accepted-by-erasing-minority-then-reorged"
LEAF_LONGEST = "in-longest-chain"


class ScenarioError(ValueError):
    """Malformed or internally inconsistent scenario document."""


@dataclass(frozen=True)
class NodeSettings:
    is_miner: bool = False
    rogue: bool = False
    maturity: int = 1


@dataclass(frozen=True)
class RogueSpend:
    """A spend of an erased output, tracked through to its outcome leaf.

    ``miner`` names the rogue node that force-includes it in the first
    block it mines at or after ``not_before``; None means nobody mines it
    and the transaction only circulates via ``inject_txs``.
    """

    not_before: int
    miner: int | None
    tx: Transaction


@dataclass(frozen=True)
class EraseEvent:
    tick: int
    node: int
    txid: bytes
    indices: tuple[int, ...]
    mode_kind: str


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    seed: int
    horizon: int
    params: ChainParams
    nodes: tuple[NodeSettings, ...]
    edges: tuple[tuple[int, int, int], ...]  # (a, b, latency), undirected
    miner_schedule: tuple[tuple[int, int], ...]  # (tick, node)
    inject_txs: tuple[tuple[int, int, Transaction], ...]  # (tick, node, tx)
    rogue_spends: tuple[RogueSpend, ...]
    erasures: tuple[EraseEvent, ...]

    def validate(self) -> None:
        n = len(self.nodes)
        if n < 1:
            raise ScenarioError("need at least one node")
        if self.horizon < 1:
            raise ScenarioError("horizon must be positive")
        for a, b, latency in self.edges:
            if not (0 <= a < n and 0 <= b < n) or a == b or latency < 1:
                raise ScenarioError(f"bad edge ({a}, {b}, {latency})")
        for tick, node in self.miner_schedule:
            if not 0 <= node < n:
                raise ScenarioError(f"schedule names unknown node {node}")
            if not self.nodes[node].is_miner:
                raise ScenarioError(f"schedule names non-miner node {node}")
            if not 0 <= tick <= self.horizon:
                raise ScenarioError(f"schedule tick {tick} outside horizon")
        for tick, node, _tx in self.inject_txs:
            if not 0 <= node < n:
                raise ScenarioError(f"injection names unknown node {node}")
        for spend in self.rogue_spends:
            if spend.miner is None:
                continue
            if not 0 <= spend.miner < n:
                raise ScenarioError(f"rogue spend names unknown node {spend.miner}")
            if not self.nodes[spend.miner].rogue:
                raise ScenarioError(f"rogue spend names non-rogue node {spend.miner}")
        for ev in self.erasures:
            if not 0 <= ev.node < n:
                raise ScenarioError(f"erasure names unknown node {ev.node}")
            if ev.mode_kind not in (ANYONE_CAN_SPEND, HASH_COMMITMENT):
                raise ScenarioError(f"unknown erasure mode {ev.mode_kind!r}")

    def to_json(self) -> str:
        doc = {
            "name": self.name,
            "seed": self.seed,
            "horizon": self.horizon,
            "params": params_to_doc(self.params),
            "nodes": [
                {"is_miner": ns.is_miner, "rogue": ns.rogue, "maturity": ns.maturity}
                for ns in self.nodes
            ],
            "edges": [list(edge) for edge in self.edges],
            "miner_schedule": [list(entry) for entry in self.miner_schedule],
            "inject_txs": [
                [tick, node, tx.encode().hex()] for tick, node, tx in self.inject_txs
            ],
            "rogue_spends": [
                {"not_before": s.not_before, "miner": s.miner, "tx": s.tx.encode().hex()}
                for s in self.rogue_spends
            ],
            "erasures": [
                {
                    "tick": e.tick,
                    "node": e.node,
                    "txid": e.txid.hex(),
                    "indices": list(e.indices),
                    "mode": e.mode_kind,
                }
                for e in self.erasures
            ],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            doc = json.loads(text)
            config = cls(
                name=doc["name"],
                seed=doc["seed"],
                horizon=doc["horizon"],
                params=params_from_doc(doc["params"]),
                nodes=tuple(
                    NodeSettings(ns["is_miner"], ns["rogue"], ns["maturity"])
                    for ns in doc["nodes"]
                ),
                edges=tuple((a, b, lat) for a, b, lat in doc["edges"]),
                miner_schedule=tuple((t, n) for t, n in doc["miner_schedule"]),
                inject_txs=tuple(
                    (t, n, Transaction.decode(bytes.fromhex(h)))
                    for t, n, h in doc["inject_txs"]
                ),
                rogue_spends=tuple(
                    RogueSpend(
                        s["not_before"], s["miner"], Transaction.decode(bytes.fromhex(s["tx"]))
                    )
                    for s in doc["rogue_spends"]
                ),
                erasures=tuple(
                    EraseEvent(
                        e["tick"],
                        e["node"],
                        bytes.fromhex(e["txid"]),
                        tuple(e["indices"]),
                        e["mode"],
                    )
                    for e in doc["erasures"]
                ),
            )
        except (KeyError, TypeError, ValueError, DecodeError) as exc:
            raise ScenarioError(f"bad scenario document: {exc}") from None
        config.validate()
        return config


@dataclass(frozen=True)
class RogueOutcome:
    txid: bytes
    leaf: str
    max_reorg_depth: int
    accepted_by: tuple[int, ...]
    resolved_at_tick: int | None


@dataclass
class _SpendTrack:
    """Acceptance intervals of one rogue spend across nodes."""

    open_at: dict[int, int] = field(default_factory=dict)  # node -> tick opened
    ever_accepted: set[int] = field(default_factory=set)
    eviction_depths: list[int] = field(default_factory=list)
    last_eviction_tick: int | None = None
    mined: bool = False


def classify_rogue_outcome(track: _SpendTrack, txid: bytes, num_nodes: int) -> RogueOutcome:
    """Map one spend's acceptance history onto its outcome leaf.

    In every node's active chain at the horizon: it made the longest chain.
    Accepted somewhere at some point but not everywhere now: the erasing
    minority was reorged off it.  Never accepted: discarded everywhere.
    """
    if len(track.open_at) == num_nodes:
        leaf = LEAF_LONGEST
    elif track.ever_accepted:
        leaf = LEAF_REORGED
    else:
        leaf = LEAF_DISCARDED
    return RogueOutcome(
        txid=txid,
        leaf=leaf,
        max_reorg_depth=max(track.eviction_depths, default=0),
        accepted_by=tuple(sorted(track.ever_accepted)),
        resolved_at_tick=track.last_eviction_tick,
    )


class Simulation:
    def __init__(self, config: ScenarioConfig):
        config.validate()
        self.config = config
        self.rng = random.Random(config.seed)
        self.nodes = [
            NodeState(
                node_id=i,
                config=NodeConfig(
                    params=config.params,
                    maturity=ns.maturity,
                    is_miner=ns.is_miner,
                    rogue=ns.rogue,
                ),
                salt_source=lambda: self.rng.randbytes(16),
            )
            for i, ns in enumerate(config.nodes)
        ]
        self.neighbors: dict[int, list[tuple[int, int]]] = {i: [] for i in range(len(self.nodes))}
        for a, b, latency in config.edges:
            self.neighbors[a].append((b, latency))
            self.neighbors[b].append((a, latency))
        for peers in self.neighbors.values():
            peers.sort()

        self._queue: list[tuple[int, int, str, tuple]] = []
        self._seq = 0
        self.tick = 0
        self.log: list[str] = []
        self.fork_events: list[dict] = []
        self.mined_by: dict[int, list[bytes]] = {i: [] for i in range(len(self.nodes))}
        self.tracks: dict[bytes, _SpendTrack] = {
            spend.tx.txid: _SpendTrack() for spend in config.rogue_spends
        }
        self._pending_spends: dict[int, list[RogueSpend]] = {}
        for spend in config.rogue_spends:
            if spend.miner is not None:
                self._pending_spends.setdefault(spend.miner, []).append(spend)

        for tick, node, tx in config.inject_txs:
            self._push(tick, DELIVER_TX, (node, tx, None))
        for ev in config.erasures:
            self._push(ev.tick, ERASE_AT, (ev,))
        for tick, node in config.miner_schedule:
            self._push(tick, MINE_ATTEMPT, (node,))

    def _push(self, tick: int, kind: str, payload: tuple) -> None:
        heapq.heappush(self._queue, (tick, self._seq, kind, payload))
        self._seq += 1

    def _emit(self, line: str) -> None:
        self.log.append(line)

    def run(self) -> "SimReport":
        """Process every event.  Sources (mining, injections, erasures) are
        all scheduled at or before the horizon; deliveries still in flight
        afterwards run to quiescence so the report shows a settled network.
        """
        while self._queue:
            tick, _seq, kind, payload = heapq.heappop(self._queue)
            self.tick = tick
            for node in self.nodes:
                node.step = tick
            self._dispatch(tick, kind, payload)
        return self._build_report()

    def _dispatch(self, tick: int, kind: str, payload: tuple) -> None:
        if kind == MINE_ATTEMPT:
            self._do_mine(tick, payload[0])
        elif kind == DELIVER_TX:
            self._do_deliver_tx(tick, *payload)
        elif kind == DELIVER_BLOCK:
            self._do_deliver_block(tick, *payload)
        elif kind == ERASE_AT:
            self._do_erase(tick, payload[0])

    def _do_mine(self, tick: int, node_id: int) -> None:
        node = self.nodes[node_id]
        extra: list[Transaction] = []
        if node.config.rogue:
            for spend in self._pending_spends.get(node_id, ()):
                track = self.tracks[spend.tx.txid]
                if not track.mined and spend.not_before <= tick:
                    extra.append(spend.tx)
                    track.mined = True
        block, result = node.mine(tick, extra_txs=extra)
        self._emit(
            f"{tick} mine n{node_id} {block.block_hash.hex()[:16]} {result.outcome}"
        )
        self.mined_by[node_id].append(block.block_hash)
        self._note_tip_change(tick, node_id, result)
        if result.outcome in (BLOCK_EXTENDED, BLOCK_REORGED, BLOCK_SIDE):
            self._announce_block(tick, node_id, block.block_hash)

    def _do_deliver_tx(self, tick: int, node_id: int, tx: Transaction, sender: int | None) -> None:
        node = self.nodes[node_id]
        if tx.txid in node.mempool:
            return
        result = node.handle_transaction(tx)
        origin = "inject" if sender is None else f"n{sender}"
        self._emit(f"{tick} tx {origin}->n{node_id} {tx.txid.hex()[:16]} {result.outcome}")
        if result.outcome == TX_ACCEPTED:
            for peer, latency in self.neighbors[node_id]:
                if self.nodes[peer].should_request("tx", tx.txid):
                    self._push(tick + latency, DELIVER_TX, (peer, tx, node_id))

    def _do_deliver_block(self, tick: int, node_id: int, raw: bytes, sender: int) -> None:
        node = self.nodes[node_id]
        try:
            block = Block.decode(raw)
        except DecodeError:
            self._emit(f"{tick} block n{sender}->n{node_id} <undecodable> dropped")
            return
        result = node.handle_block(block)
        self._emit(
            f"{tick} block n{sender}->n{node_id} {block.block_hash.hex()[:16]} "
            f"{result.outcome}"
        )
        self._note_tip_change(tick, node_id, result)
        if result.outcome in (BLOCK_EXTENDED, BLOCK_REORGED, BLOCK_SIDE):
            self._announce_block(tick, node_id, block.block_hash)

    def _do_erase(self, tick: int, ev: EraseEvent) -> None:
        node = self.nodes[ev.node]
        if ev.mode_kind == HASH_COMMITMENT:
            mode = ErasureMode.commitment(self.rng.randbytes(16))
        else:
            mode = ErasureMode.anyone_can_spend()
        receipt = node.erase(ev.txid, ev.indices, mode)
        self._emit(
            f"{tick} erase n{ev.node} {ev.txid.hex()[:16]} "
            f"indices={','.join(map(str, receipt.erased))}"
        )

    def _announce_block(self, tick: int, node_id: int, block_hash: bytes) -> None:
        raw = self.nodes[node_id].serve_block(block_hash)
        if raw is None:
            return
        for peer, latency in self.neighbors[node_id]:
            if self.nodes[peer].should_request("block", block_hash):
                self._push(tick + latency, DELIVER_BLOCK, (peer, raw, node_id))

    def _note_tip_change(self, tick: int, node_id: int, result) -> None:
        if result.outcome not in (BLOCK_EXTENDED, BLOCK_REORGED):
            return
        node = self.nodes[node_id]
        for txid, track in self.tracks.items():
            in_chain = txid in node.chain_txids
            if in_chain and node_id not in track.open_at:
                track.open_at[node_id] = tick
                track.ever_accepted.add(node_id)
            elif not in_chain and node_id in track.open_at:
                del track.open_at[node_id]
                track.eviction_depths.append(result.depth)
                track.last_eviction_tick = tick
        if result.outcome == BLOCK_REORGED:
            self.fork_events.append({"tick": tick, "node": node_id, "depth": result.depth})

    def _build_report(self) -> "SimReport":
        node_rows = []
        tips: dict[str, list[int]] = {}
        utxo_digests = {}
        for node in self.nodes:
            tip_hex = node.tip_hash.hex()
            tips.setdefault(tip_hex, []).append(node.node_id)
            active = set(node.by_height.values())
            orphaned = [h for h in self.mined_by[node.node_id] if h not in active]
            node_rows.append(
                {
                    "id": node.node_id,
                    "tip": tip_hex,
                    "height": node.tip_height,
                    "mempool": len(node.mempool),
                    "erasure_records": len(node.stores.erasures),
                    "mined": len(self.mined_by[node.node_id]),
                    "orphaned_mined": len(orphaned),
                }
            )
            utxo_digests[str(node.node_id)] = sha256(node.stores.utxo.encode()).hex()

        outcomes = [
            classify_rogue_outcome(track, txid, len(self.nodes))
            for txid, track in self.tracks.items()
        ]
        return SimReport(
            scenario=self.config.name,
            seed=self.config.seed,
            horizon=self.config.horizon,
            nodes=node_rows,
            all_tips_equal=len(tips) == 1,
            tips=tips,
            fork_events=self.fork_events,
            rogue_outcomes=outcomes,
            utxo_digests=utxo_digests,
            messages=len(self.log),
            log=tuple(self.log),
        )


@dataclass(frozen=True)
class SimReport:
    scenario: str
    seed: int
    horizon: int
    nodes: list[dict]
    all_tips_equal: bool
    tips: dict[str, list[int]]
    fork_events: list[dict]
    rogue_outcomes: list[RogueOutcome]
    utxo_digests: dict[str, str]
    messages: int
    log: tuple[str, ...]

    def to_json(self) -> str:
        doc = {
            "scenario": self.scenario,
            "seed": self.seed,
            "horizon": self.horizon,
            "nodes": self.nodes,
            "agreement": {"all_tips_equal": self.all_tips_equal, "tips": self.tips},
            "fork_events": self.fork_events,
            "rogue_outcomes": [
                {
                    "txid": o.txid.hex(),
                    "leaf": o.leaf,
                    "max_reorg_depth": o.max_reorg_depth,
                    "accepted_by": list(o.accepted_by),
                    "resolved_at_tick": o.resolved_at_tick,
                }
                for o in self.rogue_outcomes
            ],
            "utxo_digests": self.utxo_digests,
            "messages": self.messages,
            "message_log_digest": sha256("\n".join(self.log).encode()).hex(),
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def summary(self) -> str:
        lines = [f"scenario {self.scenario} (seed {self.seed}, horizon {self.horizon})"]
        for row in self.nodes:
            lines.append(
                f"  node {row['id']}: height {row['height']} tip {row['tip'][:16]} "
                f"mined {row['mined']} orphaned {row['orphaned_mined']} "
                f"erasures {row['erasure_records']}"
            )
        lines.append(f"  tips agree: {self.all_tips_equal}")
        for outcome in self.rogue_outcomes:
            lines.append(
                f"  rogue spend {outcome.txid.hex()[:16]}: {outcome.leaf} "
                f"(max reorg depth {outcome.max_reorg_depth}, "
                f"accepted by {list(outcome.accepted_by)})"
            )
        return "\n".join(lines) + "\n"


def run_scenario(config: ScenarioConfig) -> SimReport:
    return Simulation(config).run()
