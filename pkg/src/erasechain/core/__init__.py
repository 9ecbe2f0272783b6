"""Core chain types: hashes, scripts, keys, transactions, blocks, params."""

from .blocks import (
    Block,
    BlockHeader,
    NonceSpaceExhausted,
    compute_merkle_root,
    meets_difficulty,
    merkle_branch,
    mine_block,
    verify_merkle_branch,
)
from .codec import ByteReader, DecodeError
from .hashing import HASH_SIZE, ZERO_HASH, hash_from_hex, sha256
from .keys import KeyPair, verify_signature
from .params import (
    COIN,
    ChainParams,
    build_genesis,
    coinbase_transaction,
    params_from_doc,
    params_to_doc,
)
from .script import (
    MAX_PUSH_SIZE,
    Opcode,
    Script,
    ScriptError,
    SignatureContext,
    anyone_can_spend_script,
    data_carrier_script,
    eval_script,
    match_pay_to_hash,
    pay_to_hash_script,
)
from .tx import (
    COINBASE_INDEX,
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

__all__ = [
    "Block",
    "BlockHeader",
    "ByteReader",
    "COIN",
    "COINBASE_INDEX",
    "ChainParams",
    "DecodeError",
    "HASH_SIZE",
    "KeyPair",
    "MAX_PUSH_SIZE",
    "NonceSpaceExhausted",
    "Opcode",
    "OutPoint",
    "Script",
    "ScriptError",
    "SignatureContext",
    "Transaction",
    "TxInput",
    "TxOutput",
    "ZERO_HASH",
    "anyone_can_spend_output",
    "anyone_can_spend_script",
    "build_genesis",
    "coinbase_transaction",
    "compute_merkle_root",
    "data_carrier_output",
    "data_carrier_script",
    "eval_script",
    "hash_from_hex",
    "match_pay_to_hash",
    "meets_difficulty",
    "merkle_branch",
    "mine_block",
    "params_from_doc",
    "params_to_doc",
    "pay_to_hash_output",
    "pay_to_hash_script",
    "sha256",
    "signing_message",
    "unlock_script",
    "verify_signature",
]
