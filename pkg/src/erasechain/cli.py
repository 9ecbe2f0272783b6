"""Command line interface: erase, sync, and simulate."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .core.codec import DecodeError
from .core.params import params_from_doc
from .erasure import (
    ANYONE_CAN_SPEND,
    ConfigError,
    ErasureError,
    ErasureMode,
    HASH_COMMITMENT,
    UnknownTxid,
    parse_erase_config,
)
from .netsim import ScenarioConfig, ScenarioError, run_scenario
from .node import (
    BLOCK_ORPHANED,
    BLOCK_REJECTED,
    NodeConfig,
    NodeState,
    PreSeeded,
    ValidateThenErase,
    bootstrap,
)
from .storage import DataDir, DirLock, LockHeld, decode_chain, write_file

EXIT_OK = 0
EXIT_BAD_CONFIG = 1
EXIT_BAD_TARGET = 2
EXIT_LOCK_HELD = 3


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_erase(args: argparse.Namespace) -> int:
    datadir = DataDir(args.datadir)
    if not datadir.initialized():
        return _fail(f"no chain data under {args.datadir}", EXIT_BAD_CONFIG)
    try:
        with open(args.config) as fh:
            config = parse_erase_config(fh.read())
    except OSError as exc:
        return _fail(f"cannot read config: {exc}", EXIT_BAD_CONFIG)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_BAD_CONFIG)

    try:
        lock = DirLock(datadir)
        lock.acquire()
    except LockHeld as exc:
        return _fail(str(exc), EXIT_LOCK_HELD)
    try:
        node = NodeState.load(datadir, NodeConfig(maturity=args.maturity))
        if config.chain != node.params.name:
            return _fail(
                f"config is for chain {config.chain!r}, datadir holds {node.params.name!r}",
                EXIT_BAD_CONFIG,
            )
        failures = 0
        for target in config.targets:
            prefix = f"{target.txid.hex()}[{','.join(map(str, target.indices))}]"
            height = node.chain_txids.get(target.txid)
            if height is None or node.by_height.get(height) != target.block_hash:
                print(f"{prefix}: not found in block {target.block_hash.hex()}")
                failures += 1
                continue
            if (target.mode_kind or args.mode) == HASH_COMMITMENT:
                mode = ErasureMode.commitment(os.urandom(16))
            else:
                mode = ErasureMode.anyone_can_spend()
            try:
                receipt = node.erase(target.txid, target.indices, mode)
            except (UnknownTxid, ErasureError) as exc:
                print(f"{prefix}: {exc}")
                failures += 1
                continue
            print(receipt.describe())
        node.save(datadir)
    finally:
        lock.release()
    return EXIT_BAD_TARGET if failures else EXIT_OK


def cmd_sync(args: argparse.Namespace) -> int:
    datadir = DataDir(args.datadir)
    try:
        with open(args.chain, "rb") as fh:
            blocks = decode_chain(fh.read())
    except OSError as exc:
        return _fail(f"cannot read chain file: {exc}", EXIT_BAD_CONFIG)
    except DecodeError as exc:
        return _fail(f"bad chain file: {exc}", EXIT_BAD_CONFIG)

    preseed_raw = None
    if args.preseed:
        try:
            with open(args.preseed, "rb") as fh:
                preseed_raw = fh.read()
        except OSError as exc:
            return _fail(f"cannot read records file: {exc}", EXIT_BAD_CONFIG)
    erase_config = None
    if args.erase_config:
        try:
            with open(args.erase_config) as fh:
                erase_config = parse_erase_config(fh.read())
        except OSError as exc:
            return _fail(f"cannot read erase config: {exc}", EXIT_BAD_CONFIG)
        except ConfigError as exc:
            return _fail(str(exc), EXIT_BAD_CONFIG)

    try:
        lock = DirLock(datadir)
        lock.acquire()
    except LockHeld as exc:
        return _fail(str(exc), EXIT_LOCK_HELD)
    try:
        if datadir.initialized():
            node = NodeState.load(datadir, NodeConfig(maturity=args.maturity))
            if preseed_raw is not None:
                node.import_erasures(preseed_raw)
            if erase_config is not None:
                for target in erase_config.targets:
                    node.pending_erasures[target.txid] = (target.indices, target.mode_kind)
            results = [node.handle_block(block) for block in blocks]
        else:
            node = NodeState(config=_fresh_config(args))
            mode = None
            if preseed_raw is not None:
                mode = PreSeeded(preseed_raw)
            elif erase_config is not None:
                mode = ValidateThenErase(erase_config)
            results = bootstrap(node, blocks, mode)

        node.save(datadir)
        write_file(datadir.events_path, ("\n".join(node.log_lines()) + "\n").encode())
        failure = None
        for i, result in enumerate(results):
            if result.outcome in (BLOCK_REJECTED, BLOCK_ORPHANED):
                failure = (
                    f"block {blocks[i].block_hash.hex()} at file height {i} "
                    f"{result.outcome}"
                    + (f": {result.reason}" if result.reason else "")
                )
                break
        print(f"tip {node.tip_hash.hex()} height {node.tip_height}")
        if failure:
            return _fail(failure, EXIT_BAD_CONFIG)
    finally:
        lock.release()
    return EXIT_OK


def _fresh_config(args: argparse.Namespace) -> NodeConfig:
    config = NodeConfig(maturity=args.maturity)
    if args.params:
        with open(args.params) as fh:
            config = dataclasses.replace(config, params=params_from_doc(json.load(fh)))
    return config


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        with open(args.scenario) as fh:
            config = ScenarioConfig.from_json(fh.read())
    except OSError as exc:
        return _fail(f"cannot read scenario: {exc}", EXIT_BAD_CONFIG)
    except ScenarioError as exc:
        return _fail(str(exc), EXIT_BAD_CONFIG)
    report = run_scenario(config)
    os.makedirs(args.out, exist_ok=True)
    write_file(os.path.join(args.out, "report.json"), report.to_json().encode())
    write_file(os.path.join(args.out, "report.txt"), report.summary().encode())
    write_file(os.path.join(args.out, "messages.log"), ("\n".join(report.log) + "\n").encode())
    print(report.summary(), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="erasechain",
        description="UTXO chain tooling with locally erasable output payloads",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_erase = sub.add_parser("erase", help="erase output payloads named by a config document")
    p_erase.add_argument("--datadir", required=True, help="node data directory")
    p_erase.add_argument("--config", required=True, help="JSON erase-config document")
    p_erase.add_argument(
        "--mode",
        choices=[ANYONE_CAN_SPEND, HASH_COMMITMENT],
        default=ANYONE_CAN_SPEND,
        help="default mode for targets that do not name one",
    )
    p_erase.add_argument("--maturity", type=int, default=300, help="minimum burial depth")
    p_erase.set_defaults(func=cmd_erase)

    p_sync = sub.add_parser("sync", help="validate a chain file into a data directory")
    p_sync.add_argument("--datadir", required=True, help="node data directory")
    p_sync.add_argument("--chain", required=True, help="chain file, genesis first")
    p_sync.add_argument("--preseed", help="erasure records installed before validation")
    p_sync.add_argument("--erase-config", help="targets erased as their blocks connect")
    p_sync.add_argument("--params", help="chain parameters JSON for a fresh datadir")
    p_sync.add_argument("--maturity", type=int, default=300, help="prune/erase horizon")
    p_sync.set_defaults(func=cmd_sync)

    p_sim = sub.add_parser("simulate", help="run a deterministic network scenario")
    p_sim.add_argument("--scenario", required=True, help="scenario JSON document")
    p_sim.add_argument("--out", required=True, help="directory for report files")
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
