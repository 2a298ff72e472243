import pytest

from board_utils import drop_entry, flip_byte, replace_payload
from evote.ballot import compose_ballot, encode_choice
from evote.bulletin import (
    Board,
    KIND_BALLOT_CAST,
    KIND_DECRYPTED_BALLOT,
    KIND_MIX_STAGE,
    KIND_PARTIAL_DECRYPTION,
    KIND_RESULT,
    KIND_TRANSFER,
    login_payload,
    parse_decrypted_ballot,
    parse_mix_stage,
    parse_partial_decryption,
    parse_result,
    parse_transfer,
    universal_verify,
    verify_chain,
)
from evote.canonical import derive_rng
from evote.tally import Election, ElectionConfig


@pytest.fixture(scope="module")
def tallied():
    """Small honest election, tallied, with a verifiable board."""
    config = ElectionConfig(candidates=["a", "b", "c"], proof_rounds=6)
    election, creds = Election.setup(config, ["v1", "v2", "v3", "v4"], seed=99)
    votes = [("v1", 1), ("v2", 2), ("v3", 1), ("v4", 0), ("v1", 0)]
    for i, (vid, cand) in enumerate(votes):
        sb = compose_ballot(
            election.params,
            creds[vid],
            election.election_key.h,
            encode_choice(cand, 3),
            timestamp=i,
            rng=derive_rng(99, "ballot", vid, i),
        )
        assert election.cast(sb, now=i) is not None
    election.close_election()
    election.run_tally()
    return election, config


def test_board_appends_chain(grp):
    board = Board()
    e0 = board.append("Login", login_payload("alice"))
    e1 = board.append("Login", login_payload("bob"))
    assert e0.seq == 0 and e1.seq == 1
    assert e1.prev_digest == e0.digest
    assert verify_chain(board)


def test_unknown_kind_rejected():
    board = Board()
    with pytest.raises(ValueError):
        board.append("Gossip", b"")


def test_save_load_round_trip(tallied, tmp_path):
    election, _ = tallied
    path = tmp_path / "board.jsonl"
    election.board.save(path)
    loaded = Board.load(path)
    assert loaded.entries == election.board.entries
    assert verify_chain(loaded)


def test_chain_detects_payload_edit(tallied):
    election, _ = tallied
    board = election.board
    mutated = replace_payload(
        board, 1, flip_byte(board.entries[1].payload), fix_chain=False
    )
    assert not verify_chain(mutated)


def test_chain_detects_deletion(tallied):
    election, _ = tallied
    assert not verify_chain(drop_entry(election.board, 2, fix_chain=False))


def test_rechained_board_passes_chain_check(tallied):
    election, _ = tallied
    board = drop_entry(election.board, 2, fix_chain=True)
    assert verify_chain(board)


def test_payload_codecs_round_trip(tallied):
    election, _ = tallied
    board = election.board
    label, digest = parse_transfer(board.find(KIND_TRANSFER)[0].payload)
    assert isinstance(label, str) and len(digest) == 32
    idx, stage = parse_mix_stage(board.find(KIND_MIX_STAGE)[0].payload)
    assert idx == 0 and stage.batch_in.items
    item, slot, trustee, d, proof = parse_partial_decryption(
        board.find(KIND_PARTIAL_DECRYPTION)[0].payload
    )
    assert (item, slot, trustee) == (0, 0, 1)
    item, exps, valid = parse_decrypted_ballot(
        board.find(KIND_DECRYPTED_BALLOT)[0].payload
    )
    assert valid and sum(exps) == 1
    counts, invalid, revoked, kept, cast, flagged = parse_result(
        board.find(KIND_RESULT)[0].payload
    )
    assert sum(counts) == kept
    assert cast == kept + revoked


def test_universal_verify_passes_honest_board(tallied):
    election, config = tallied
    report = universal_verify(
        election.params,
        election.board,
        config,
        election.election_key.h,
        election.commitments,
    )
    assert report.overall, report.failures
    assert report.signatures_skipped
    assert set(report.checks) == {
        "chain_integrity",
        "wellformedness",
        "mix_stages",
        "decryption_proofs",
        "count_recomputation",
    }


def _verify(election, config, board):
    return universal_verify(
        election.params, board, config, election.election_key.h, election.commitments
    )


def test_tampered_ballot_payload_fails_wellformedness(tallied):
    election, config = tallied
    board = election.board
    seq = board.find(KIND_BALLOT_CAST)[0].seq
    # flip a byte inside the first slot ciphertext (past the 4+32 digest
    # prefix) and re-chain so only proof verification can catch it
    payload = board.entries[seq].payload
    mutated = replace_payload(board, seq, flip_byte(payload, 40), fix_chain=True)
    report = _verify(election, config, mutated)
    assert not report.checks["wellformedness"]
    assert report.checks["chain_integrity"]


def test_swapped_mix_output_rows_fail(tallied):
    from evote.mixnet import MixBatch, MixStage
    from evote.bulletin import mix_stage_payload

    election, config = tallied
    board = election.board
    entry = board.find(KIND_MIX_STAGE)[-1]
    idx, stage = parse_mix_stage(entry.payload)
    items = list(stage.batch_out.items)
    items[0], items[1] = items[1], items[0]
    forged_stage = MixStage(
        batch_in=stage.batch_in,
        batch_out=MixBatch(items=tuple(items)),
        proof=stage.proof,
    )
    mutated = replace_payload(
        board, entry.seq, mix_stage_payload(idx, forged_stage), fix_chain=True
    )
    report = _verify(election, config, mutated)
    assert not report.checks["mix_stages"]
    assert report.checks["chain_integrity"]


def test_broken_stage_continuity_fails(tallied):
    from evote.mixnet import MixStage
    from evote.bulletin import mix_stage_payload

    election, config = tallied
    board = election.board
    entries = board.find(KIND_MIX_STAGE)
    _, stage0 = parse_mix_stage(entries[0].payload)
    idx1, stage1 = parse_mix_stage(entries[1].payload)
    forged_stage = MixStage(
        batch_in=stage0.batch_in,  # should be stage0.batch_out
        batch_out=stage1.batch_out,
        proof=stage1.proof,
    )
    mutated = replace_payload(
        board, entries[1].seq, mix_stage_payload(idx1, forged_stage), fix_chain=True
    )
    report = _verify(election, config, mutated)
    assert not report.checks["mix_stages"]


def test_missing_mix_stage_fails(tallied):
    election, config = tallied
    board = election.board
    seq = board.find(KIND_MIX_STAGE)[-1].seq
    report = _verify(election, config, drop_entry(board, seq, fix_chain=True))
    assert not report.checks["mix_stages"]


def test_corrupted_partial_decryption_fails(tallied):
    election, config = tallied
    board = election.board
    seq = board.find(KIND_PARTIAL_DECRYPTION)[0].seq
    payload = board.entries[seq].payload
    mutated = replace_payload(board, seq, flip_byte(payload, len(payload) - 1), fix_chain=True)
    report = _verify(election, config, mutated)
    assert not report.checks["decryption_proofs"]
    assert report.checks["chain_integrity"]


def test_altered_result_counts_fail(tallied):
    election, config = tallied
    board = election.board
    entry = board.find(KIND_RESULT)[0]
    counts, invalid, revoked, kept, cast, flagged = parse_result(entry.payload)
    from evote.bulletin import result_payload

    forged = result_payload([counts[0] + 1] + counts[1:], invalid, revoked, kept, cast, flagged)
    mutated = replace_payload(board, entry.seq, forged, fix_chain=True)
    report = _verify(election, config, mutated)
    assert not report.checks["count_recomputation"]
    assert report.checks["chain_integrity"]
