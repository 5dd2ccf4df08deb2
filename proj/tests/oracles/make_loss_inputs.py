"""Builds tests/fixtures/hermetic/loss_inputs.jsonl from a pairs.jsonl.

Log-probabilities are derived from a hash of the pair id, so the file is
stable for a given set of pairs.

    python3 make_loss_inputs.py out/pairs.jsonl > ../fixtures/hermetic/loss_inputs.jsonl
"""
import hashlib
import json
import sys


def logp(pair_id, role):
    h = int(hashlib.sha256(f"{pair_id}|{role}".encode()).hexdigest()[:8], 16)
    return -round(5.0 + (h % 4000) / 100.0, 2)


def main(path):
    for line in open(path):
        p = json.loads(line)
        row = {
            "pair_id": p["pair_id"],
            "logp": {r: logp(p["pair_id"], r) for r in ("policy_chosen", "policy_rejected", "ref_chosen", "ref_rejected")},
        }
        if "gas_chosen" in p and "gas_rejected" in p:
            row["gas_chosen"] = p["gas_chosen"]
            row["gas_rejected"] = p["gas_rejected"]
        row["safe_chosen"] = p["safe_chosen"]
        row["safe_rejected"] = p["safe_rejected"]
        print(json.dumps(row, separators=(",", ":")))


if __name__ == "__main__":
    main(sys.argv[1])
