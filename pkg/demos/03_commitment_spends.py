#!/usr/bin/env python3
"""Commitment-mode erasure: drop the payload, keep the spend check exact.

Anyone-can-spend erasure gives up on verifying future spends.  Commitment
mode instead stores sha256(salt || original_hash) next to the redacted
output, which is enough to judge a later spend exactly as the original
pay-to-hash script would have, without keeping the hash itself around.

Run from the repository root:

    python3 demos/03_commitment_spends.py
"""

import os

from erasechain.core import (
    KeyPair,
    SignatureContext,
    Transaction,
    TxInput,
    TxOutput,
    eval_script,
    pay_to_hash_script,
    sha256,
    unlock_script,
    verify_signature,
)
from erasechain.erasure import (
    CHECK_PASS,
    ErasureMode,
    ErasureRecord,
    check_erased_spend,
    redact_transaction,
)


def main() -> None:
    owner = KeyPair.from_int(31337)
    thief = KeyPair.from_int(31338)
    lock = pay_to_hash_script(owner.pubkey_hash)
    tx = Transaction((TxInput(sha256(b"funding"), 0),), (TxOutput(100, lock),))

    mode = ErasureMode.commitment(os.urandom(16))
    redacted, erased = redact_transaction(tx, [0], mode)
    record = ErasureRecord(tx.txid, sha256(b"block"), redacted, erased)
    print(f"original locking script: {lock.encode().hex()}")
    print(f"redacted locking script: {redacted.outputs[0].script_pubkey.encode().hex()}")
    print(f"stored commitment:       {erased[0].commitment.hex()}")

    message = sha256(b"the spending transaction")
    ctx = SignatureContext(message, verify_signature)
    attempts = {
        "owner, correct signature": unlock_script(owner.sign(message), owner.pubkey),
        "thief, own key":           unlock_script(thief.sign(message), thief.pubkey),
        "owner key, bad signature": unlock_script(owner.sign(sha256(b"other")), owner.pubkey),
    }
    for label, script_sig in attempts.items():
        full = eval_script(script_sig, lock, ctx)
        erased_verdict = check_erased_spend(record, 0, script_sig, ctx)
        agreement = "agrees with" if (erased_verdict == CHECK_PASS) == full else "DIVERGES from"
        print(f"{label:28s} full evaluation: {str(full):5s}  "
              f"erased check: {erased_verdict:12s} ({agreement} full evaluation)")
        assert (erased_verdict == CHECK_PASS) == full


if __name__ == "__main__":
    main()
