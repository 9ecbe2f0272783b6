"""A UTXO chain where nodes can locally erase output payloads and stay in sync.

The package splits into the chain core (``erasechain.core``), consensus
checks (``validation``), persistent stores (``storage``), the erasure
machinery (``erasure``), a full node (``node``), a deterministic network
simulator (``netsim`` with canned scenarios in ``presets``), synthetic
chain generation (``chaingen``), and the command line front end (``cli``).
"""

from .core import (
    Block,
    BlockHeader,
    COIN,
    ChainParams,
    KeyPair,
    Opcode,
    OutPoint,
    Script,
    Transaction,
    TxInput,
    TxOutput,
    build_genesis,
    sha256,
)
from .erasure import ErasureDb, ErasureMode, ErasureRecord, erase_outputs, redact_transaction
from .node import NodeConfig, NodeState, bootstrap
from .netsim import ScenarioConfig, SimReport, run_scenario
from .validation import validate_block, validate_transaction

__version__ = "0.1.0"

__all__ = [
    "Block",
    "BlockHeader",
    "COIN",
    "ChainParams",
    "ErasureDb",
    "ErasureMode",
    "ErasureRecord",
    "KeyPair",
    "NodeConfig",
    "NodeState",
    "Opcode",
    "OutPoint",
    "ScenarioConfig",
    "Script",
    "SimReport",
    "Transaction",
    "TxInput",
    "TxOutput",
    "bootstrap",
    "build_genesis",
    "erase_outputs",
    "redact_transaction",
    "run_scenario",
    "sha256",
    "validate_block",
    "validate_transaction",
    "__version__",
]
