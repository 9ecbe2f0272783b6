"""Stack-machine scripts that lock and unlock transaction outputs.

A script is a flat sequence of ops, where each op is either an ``Opcode``
or the raw bytes of a push.  Execution is deliberately tiny: no flow
control, no arithmetic, and any malformed condition terminates the script
as false rather than raising.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, Union

from .hashing import sha256

# Hard cap on a single pushed item, and therefore on any data payload
# carried by an output.
MAX_PUSH_SIZE = 520

# Wire tag for a push op.  Plain opcodes encode as their own byte value.
PUSH_TAG = 0x01


class Opcode(IntEnum):
    DUP = 0x02
    HASH = 0x03
    EQUALVERIFY = 0x04
    CHECKSIG = 0x05
    TRUE = 0x06
    FALSE = 0x07
    RETURN = 0x08


Op = Union[Opcode, bytes]


class ScriptError(Exception):
    """Malformed script bytes (bad tag, truncated push, oversized push)."""


@dataclass(frozen=True)
class SignatureContext:
    """What CHECKSIG needs: the message being signed and a verifier.

    ``verifier(signature, pubkey, message)`` returns True on a valid
    signature and False on anything else, never raising.
    """

    message: bytes
    verifier: Callable[[bytes, bytes, bytes], bool]


@dataclass(frozen=True)
class Script:
    ops: tuple[Op, ...] = ()

    def __iter__(self):
        return iter(self.ops)

    def encode(self) -> bytes:
        chunks = []
        for op in self.ops:
            if isinstance(op, bytes):
                if len(op) > MAX_PUSH_SIZE:
                    raise ScriptError(f"push of {len(op)} bytes exceeds {MAX_PUSH_SIZE}")
                chunks.append(struct.pack("<BH", PUSH_TAG, len(op)))
                chunks.append(op)
            else:
                chunks.append(bytes([op]))
        return b"".join(chunks)

    @classmethod
    def decode(cls, raw: bytes) -> "Script":
        ops: list[Op] = []
        pos = 0
        while pos < len(raw):
            tag = raw[pos]
            pos += 1
            if tag == PUSH_TAG:
                if pos + 2 > len(raw):
                    raise ScriptError("truncated push length")
                (size,) = struct.unpack_from("<H", raw, pos)
                pos += 2
                if size > MAX_PUSH_SIZE:
                    raise ScriptError(f"push of {size} bytes exceeds {MAX_PUSH_SIZE}")
                if pos + size > len(raw):
                    raise ScriptError("truncated push data")
                ops.append(raw[pos : pos + size])
                pos += size
            else:
                try:
                    ops.append(Opcode(tag))
                except ValueError:
                    raise ScriptError(f"unknown opcode 0x{tag:02x}") from None
        return cls(tuple(ops))

    def is_push_only(self) -> bool:
        return all(isinstance(op, bytes) for op in self.ops)

    def is_unspendable(self) -> bool:
        """RETURN-first scripts terminate false on any input, provably."""
        return bool(self.ops) and self.ops[0] == Opcode.RETURN

    def push_payloads(self) -> tuple[bytes, ...]:
        """Every pushed item, in script order."""
        return tuple(op for op in self.ops if isinstance(op, bytes))


def truthy(item: bytes) -> bool:
    return any(item)


def _run(script: Script, stack: list[bytes], ctx: SignatureContext) -> bool:
    for op in script.ops:
        if isinstance(op, bytes):
            stack.append(op)
        elif op == Opcode.TRUE:
            stack.append(b"\x01")
        elif op == Opcode.FALSE:
            stack.append(b"")
        elif op == Opcode.RETURN:
            return False
        elif op == Opcode.DUP:
            if not stack:
                return False
            stack.append(stack[-1])
        elif op == Opcode.HASH:
            if not stack:
                return False
            stack.append(sha256(stack.pop()))
        elif op == Opcode.EQUALVERIFY:
            if len(stack) < 2:
                return False
            if stack.pop() != stack.pop():
                return False
        elif op == Opcode.CHECKSIG:
            if len(stack) < 2:
                return False
            pubkey = stack.pop()
            signature = stack.pop()
            stack.append(b"\x01" if ctx.verifier(signature, pubkey, ctx.message) else b"")
    return True


def eval_script(script_sig: Script, script_pubkey: Script, ctx: SignatureContext) -> bool:
    """Run the unlocking script then the locking script on one shared stack.

    True iff both halves complete and the final top of stack is truthy
    (contains any nonzero byte).  All failure modes are False, not errors.
    """
    stack: list[bytes] = []
    if not _run(script_sig, stack, ctx):
        return False
    if not _run(script_pubkey, stack, ctx):
        return False
    return bool(stack) and truthy(stack[-1])


# Standard output templates.


def pay_to_hash_script(pubkey_hash: bytes) -> Script:
    """Spendable by whoever holds a pubkey hashing to ``pubkey_hash``.

    Unlocked with ``PUSH(sig) PUSH(pubkey)``.
    """
    return Script((Opcode.DUP, Opcode.HASH, pubkey_hash, Opcode.EQUALVERIFY, Opcode.CHECKSIG))


def anyone_can_spend_script() -> Script:
    return Script((Opcode.TRUE,))


def data_carrier_script(payload: bytes) -> Script:
    """Unspendable output whose only job is to embed ``payload``."""
    if len(payload) > MAX_PUSH_SIZE:
        raise ScriptError(f"payload of {len(payload)} bytes exceeds {MAX_PUSH_SIZE}")
    return Script((Opcode.RETURN, payload))


def match_pay_to_hash(script: Script) -> bytes | None:
    """The committed pubkey hash if ``script`` is the standard template."""
    ops = script.ops
    if (
        len(ops) == 5
        and ops[0] == Opcode.DUP
        and ops[1] == Opcode.HASH
        and isinstance(ops[2], bytes)
        and ops[3] == Opcode.EQUALVERIFY
        and ops[4] == Opcode.CHECKSIG
    ):
        return ops[2]
    return None
