"""Independent Task@k oracle for the golden metrics CSVs.

Counts are derived straight from the mock rule table (after applying the
compile => pass => gas implication chain), and every Task@k value is the
fraction of all k-subsets of the n samples that contain at least one
positive sample, found by exhaustive enumeration.

usage: metrics_oracle.py FIXTURE_DIR K1,K2,... > golden.csv
"""
import hashlib
import itertools
import json
import sys

SEV = {"info": 0, "informational": 0, "optimization": 0, "low": 1, "medium": 2, "high": 3}


def load(path):
    with open(path) as f:
        return [json.loads(l) for l in f if l.strip()]


def enum_task_at_k(flags, k):
    hits = total = 0
    for subset in itertools.combinations(range(len(flags)), k):
        total += 1
        hits += any(flags[i] for i in subset)
    return hits / total


def main():
    fixture, ks = sys.argv[1], [int(x) for x in sys.argv[2].split(",")]
    problems = {p["id"]: p for p in load(f"{fixture}/problems.jsonl")}
    cands = load(f"{fixture}/candidates.jsonl")
    rules_by_id, rules_by_hash = {}, {}
    for r in load(f"{fixture}/mock_rules.jsonl"):
        if "candidate_id" in r:
            rules_by_id[r["candidate_id"]] = r
        else:
            rules_by_hash[r["content_sha256"]] = r

    samples = {}
    for c in cands:
        r = rules_by_id.get(c["id"]) or rules_by_hash[hashlib.sha256(c["source"].encode()).hexdigest()]
        compiled = r["compiled"]
        passed = r["passed"] and compiled
        gas = r.get("gas") if passed else None
        findings = r["findings"] if compiled else []
        secure = compiled and all(SEV[f["severity"].lower()] < SEV["high"] for f in findings)
        ref = problems[c["problem_id"]].get("reference_gas")
        eff = passed and gas is not None and ref is not None and gas < ref
        samples.setdefault(c["problem_id"], []).append((compiled, passed, eff, secure))

    rows, agg = [], {k: [[], [], [], []] for k in ks}
    for pid in sorted(samples):
        s = samples[pid]
        has_ref = problems[pid].get("reference_gas") is not None
        for k in ks:
            vals = [enum_task_at_k([x[1] for x in s], k), enum_task_at_k([x[0] for x in s], k),
                    enum_task_at_k([x[2] for x in s], k) if has_ref else None,
                    enum_task_at_k([x[3] for x in s], k)]
            rows.append((pid, k, vals))
            for i, v in enumerate(vals):
                if v is not None:
                    agg[k][i].append(v)
    for k in ks:
        rows.append(("ALL", k, [sum(a) / len(a) if a else None for a in agg[k]]))

    fmt = lambda v: "NA" if v is None else f"{v:.6f}"
    print("problem_id,k,pass,compile,gas,secure")
    for pid, k, (p, c, g, s) in rows:
        print(f"{pid},{k},{fmt(p)},{fmt(c)},{fmt(g)},{fmt(s)}")


main()
