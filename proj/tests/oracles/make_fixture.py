"""Generates the hermetic fixture under tests/fixtures/hermetic.

Run once; the outputs are committed. Rules are hand-shaped per problem so
every metric and pair objective has something to count.
"""
import hashlib
import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "fixtures", "hermetic")
os.makedirs(OUT, exist_ok=True)

problems = [
    {"id": "erc20_approve", "prompt": "Implement approve(spender, amount) for an ERC-20 token; emit Approval.", "reference_gas": 46000},
    {"id": "erc20_transfer", "prompt": "Implement transfer(to, amount) for an ERC-20 token; revert on insufficient balance.", "reference_gas": 50000},
    {"id": "erc721_mint", "prompt": "Implement mint(to, tokenId) for an ERC-721 collection restricted to the owner."},
    {"id": "erc721_transfer_from", "prompt": "Implement transferFrom(from, to, tokenId) for ERC-721 with approval checks.", "reference_gas": 60000},
]

# (compiled, passed, gas, findings) per sample, 10 samples per problem.
H = [{"detector": "reentrancy-eth", "severity": "high"}]
M = [{"detector": "tx-origin", "severity": "medium"}]
I = [{"detector": "naming-convention", "severity": "info"}]
L = [{"detector": "timestamp", "severity": "low"}]
rules = {
    "erc20_approve": [
        (True, True, 44000, []), (True, True, 46000, I), (True, True, 47500, []), (True, False, None, H),
        (True, False, None, []), (False, False, None, []), (True, True, 45000, M), (True, False, None, L),
        (False, False, None, []), (True, True, 52000, H),
    ],
    "erc20_transfer": [
        (True, True, 40000, []), (True, True, 45000, I), (True, True, 48000, []), (True, True, 52000, H),
        (True, True, 60000, []), (True, True, 61000, []), (True, False, None, H), (True, False, None, H),
        (False, False, None, []), (False, True, 30000, []),  # inconsistent on purpose: enforcement clears it
    ],
    "erc721_mint": [
        (True, True, 70000, []), (True, True, 68000, L), (True, False, None, H), (True, False, None, H),
        (True, False, None, []), (False, False, None, []), (False, False, None, []), (True, True, 72000, []),
        (True, False, None, M), (False, False, None, []),
    ],
    "erc721_transfer_from": [
        (True, True, 58000, []), (True, True, 59500, []), (True, True, 61000, I), (True, True, 65000, H),
        (True, False, None, []), (True, False, None, H), (True, True, 57000, []), (True, False, None, L),
        (True, True, 60000, []), (False, False, None, []),
    ],
}

models = ["model-a", "model-b", "model-c"]
cands, rule_lines, raw_lines = [], [], []
for p in problems:
    for i, (comp, passed, gas, findings) in enumerate(rules[p["id"]]):
        cid = f"{p['id']}-s{i:02d}"
        src = f"// {p['id']} sample {i}\nfunction impl_{i}() external {{ /* body {i} */ }}\n"
        cands.append({"id": cid, "problem_id": p["id"], "model_id": models[i % 3], "source": src})
        rule = {"compiled": comp, "passed": passed}
        if gas is not None:
            rule["gas"] = gas
        rule["findings"] = findings
        # a few rules keyed by content hash to exercise that lookup path
        if i == 4:
            key = {"content_sha256": hashlib.sha256(src.encode()).hexdigest()}
        else:
            key = {"candidate_id": cid}
        rule_lines.append({**key, **rule})
        raw = {"candidate_id": cid, "compiler_ok": comp, "tests_passed": passed}
        if gas is not None:
            raw["gas_used"] = gas
        sev_names = {"high": "High", "medium": "Medium", "low": "Low", "info": "Informational"}
        raw["analysis_findings"] = [{"detector": f["detector"], "severity": sev_names[f["severity"]]} for f in findings]
        raw_lines.append(raw)


def dump(name, rows):
    with open(os.path.join(OUT, name), "w") as f:
        for r in rows:
            f.write(json.dumps(r, separators=(",", ":")) + "\n")


dump("problems.jsonl", problems)
dump("candidates.jsonl", cands)
dump("mock_rules.jsonl", rule_lines)
dump("raw_results.jsonl", raw_lines)
with open(os.path.join(OUT, "config.txt"), "w") as f:
    f.write("# hermetic fixture configuration\n"
            "damping = 0.85\niterations = 10\nalpha = 1.0\nbeta = 1.0\nlambda = 0.5\n"
            "dpo_temperature = 0.1\nscore_epsilon = 1e-6\nsamples_per_problem = 10\n"
            "k_values = 1,5,10\ngas_reward_mode = relative_clipped\nseverity_threshold = high\n"
            "proportions = 0.5,0.25,0.25\nseed = 7\n")

# 2 problems x 10 candidates subset for the metrics golden test
SUB = os.path.join(HERE, "..", "fixtures", "metrics2x10")
os.makedirs(SUB, exist_ok=True)
keep = {"erc20_transfer", "erc721_mint"}
for name, rows in [("problems.jsonl", [p for p in problems if p["id"] in keep]),
                   ("candidates.jsonl", [c for c in cands if c["problem_id"] in keep]),
                   ("mock_rules.jsonl", [r for r, c in zip(rule_lines, cands) if c["problem_id"] in keep])]:
    with open(os.path.join(SUB, name), "w") as f:
        for r in rows:
            f.write(json.dumps(r, separators=(",", ":")) + "\n")
