"""Simulated governmental PKI: enrollment, eligibility, Schnorr signatures.

Enrollment issues a credential (the stand-in for an eID card) holding the
signing key; the registry itself keeps only public records and answers
eligibility with a bare boolean.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .canonical import digest, encode
from .errors import DuplicateVoter
from .groups import GroupParams, keygen

DOMAIN_SIG = "evote/registry/schnorr"
_DOMAIN_SIG_NONCE = "evote/registry/schnorr-nonce"


@dataclass
class VoterRecord:
    voter_id: str
    verify_key: int
    eligible: bool = True


@dataclass(frozen=True)
class VoterCredential:
    """Issued to the voter at enrollment; never stored by the registry."""

    voter_id: str
    signing_key: int
    verify_key: int


@dataclass(frozen=True)
class Signature:
    commit: int
    response: int

    def to_bytes(self) -> bytes:
        return encode(self.commit, self.response)


class Registry:
    """Read-mostly voter directory; enrollment happens during setup."""

    def __init__(self, params: GroupParams):
        self.params = params
        self.records: dict[str, VoterRecord] = {}

    def save(self, path: str | Path) -> None:
        """One voter per line: id, verify key, eligibility flag."""
        lines = [
            json.dumps(
                {"voter_id": r.voter_id, "verify_key": r.verify_key, "eligible": r.eligible},
                sort_keys=True,
            )
            for r in self.records.values()
        ]
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))

    @classmethod
    def load(cls, params: GroupParams, path: str | Path) -> "Registry":
        reg = cls(params)
        for line in Path(path).read_text().splitlines():
            if not line.strip():
                continue
            row = json.loads(line)
            reg.records[row["voter_id"]] = VoterRecord(
                voter_id=row["voter_id"],
                verify_key=row["verify_key"],
                eligible=row["eligible"],
            )
        return reg


def enroll_voter(registry: Registry, voter_id: str, rng: random.Random) -> VoterCredential:
    """Bind a fresh signature key pair to voter_id and mark it eligible."""
    if voter_id in registry.records:
        raise DuplicateVoter(voter_id)
    kp = keygen(registry.params, rng)
    registry.records[voter_id] = VoterRecord(voter_id=voter_id, verify_key=kp.pk)
    return VoterCredential(voter_id=voter_id, signing_key=kp.sk, verify_key=kp.pk)


def is_eligible(registry: Registry, voter_id: str) -> bool:
    record = registry.records.get(voter_id)
    return record is not None and record.eligible


def revoke_eligibility(registry: Registry, voter_id: str) -> None:
    record = registry.records.get(voter_id)
    if record is not None:
        record.eligible = False


def verify_key_of(registry: Registry, voter_id: str) -> int | None:
    record = registry.records.get(voter_id)
    return record.verify_key if record is not None else None


def sign(params: GroupParams, signing_key: int, message: bytes) -> Signature:
    """Schnorr signature over the canonical encoding of message."""
    p, q, g = params.p, params.q, params.g
    vk = pow(g, signing_key, p)
    # Derandomized nonce: a function of key and message, never reused across
    # distinct messages, no RNG dependency at signing time.
    w = int.from_bytes(digest(_DOMAIN_SIG_NONCE, signing_key, message), "big") % q
    commit = pow(g, w, p)
    e = _sig_challenge(params, vk, commit, message)
    z = (w + e * signing_key) % q
    return Signature(commit=commit, response=z)


def verify_sig(params: GroupParams, verify_key: int, message: bytes, sig: Signature) -> bool:
    p = params.p
    e = _sig_challenge(params, verify_key, sig.commit, message)
    return pow(params.g, sig.response, p) == (sig.commit * pow(verify_key, e, p)) % p


def _sig_challenge(params: GroupParams, vk: int, commit: int, message: bytes) -> int:
    h = digest(DOMAIN_SIG, params.to_bytes(), vk, commit, message)
    return int.from_bytes(h, "big") % params.q
