#!/usr/bin/env python3
"""Derive the canned rollout and prediction files of the synthetic fixture.

Usage: gen_canned_rollouts.py <city stage dir>

Reads test_prompts.jsonl and registry.jsonl produced by `geosid emit-prompts`
and `geosid build-sid` on the synthetic fixture and writes rollouts.jsonl and
predictions.jsonl next to the fixture inputs. Each prompt gets four
completions: a well-formed trace naming the target, a well-formed trace naming
another registered POI, a bare id without reasoning, and free text without an
id. One deliberately malformed line is appended.
"""
import json
import pathlib
import random
import sys

FIXTURE = pathlib.Path(__file__).resolve().parent.parent / "crates/cli/tests/fixtures/synthetic"


def trace(surface: str) -> str:
    return (
        "<think>\n"
        "Step 1: The user tends to move between a small set of places during the day.\n"
        "Step 2: Possible next-POI candidates are the places visited most recently.\n"
        "Step 3: The closest frequent candidate is preferred.\n"
        "</think>\n" + surface
    )


def main() -> None:
    stage = pathlib.Path(sys.argv[1])
    prompts = [json.loads(l) for l in (stage / "test_prompts.jsonl").read_text().splitlines() if l.strip()]
    registry = [json.loads(l) for l in (stage / "registry.jsonl").read_text().splitlines()[1:] if l.strip()]
    surfaces = sorted(r["surface"] for r in registry)
    rng = random.Random(7)

    rollouts, predictions = [], []
    for p in prompts:
        gold = p["target_sid_surface"]
        other = rng.choice([s for s in surfaces if s != gold])
        texts = [trace(gold), trace(other), gold, "The user will probably go back to the office."]
        for i, text in enumerate(texts):
            rollouts.append({"prompt_id": p["prompt_id"], "completion_index": i, "completion_text": text})
        ranked = rng.sample([s for s in surfaces if s != gold], 4)
        ranked.insert(rng.randrange(5), gold)
        predictions.append({"prompt_id": p["prompt_id"], "ranked": ranked})

    lines = [json.dumps(r, ensure_ascii=False) for r in rollouts]
    lines.insert(3, '{"prompt_id": "broken", "completion_index": ')
    (FIXTURE / "rollouts.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (FIXTURE / "predictions.jsonl").write_text(
        "\n".join(json.dumps(r, ensure_ascii=False) for r in predictions) + "\n", encoding="utf-8"
    )


if __name__ == "__main__":
    main()
