#!/usr/bin/env python3
"""Regenerate a fixture manifest.

Computes corpus statistics, the vocabulary size at min_freq 2, and file
checksums with plain Python, independently of the C++ implementation, so the
test suite can cross-check the library against this file.

Usage:
  scripts/make_manifest.py fixtures/synthetic           # (re)write manifest.json
  scripts/make_manifest.py --check fixtures/synthetic   # verify the committed one
"""
import hashlib
import json
import re
import sys
from collections import Counter
from pathlib import Path

TOKEN_RE = re.compile(r"[0-9A-Za-z]+")


def tokenize(text):
    # ASCII alphanumeric runs, lowercased; everything else separates.
    return [t.lower() for t in TOKEN_RE.findall(text.encode().decode("ascii", "replace"))]


def sha256(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def main():
    args = sys.argv[1:]
    check = "--check" in args
    if check:
        args.remove("--check")
    fixture_dir = Path(args[0])
    corpus_path = fixture_dir / "corpus.jsonl"
    relations_path = fixture_dir / "relations.jsonl"

    chunks = [json.loads(line) for line in corpus_path.read_text().splitlines() if line.strip()]
    relations = [json.loads(line) for line in relations_path.read_text().splitlines() if line.strip()]

    speakers = []
    episodes = []
    freq = Counter()
    total_turns = 0
    total_characters = 0
    for chunk in chunks:
        if chunk["episode_id"] not in episodes:
            episodes.append(chunk["episode_id"])
        total_turns += len(chunk["turns"])
        total_characters += len(chunk["characters_present"])
        for turn in chunk["turns"]:
            if turn["speaker"] not in speakers:
                speakers.append(turn["speaker"])
            freq.update(tokenize(turn["text"]))
        freq.update(tokenize(chunk["summary"]))

    # Mirrors the library's vocabulary rule: reserved entries, one marker per
    # registry character, then every corpus token with frequency >= 2. Corpus
    # tokens that collide with a reserved word are not counted twice.
    reserved = ["<pad>", "<unk>", "<sep>", "<lead>", "positive", "negative", "neutral"]
    entries = set(reserved) | {f"<spkr:{name}>" for name in speakers}
    entries |= {tok for tok, count in freq.items() if count >= 2}

    manifest = {
        "num_chunks": len(chunks),
        "num_episodes": len(episodes),
        "num_characters": len(speakers),
        "total_turns": total_turns,
        "avg_turns_per_chunk": total_turns / len(chunks),
        "avg_characters_per_chunk": total_characters / len(chunks),
        "num_relation_descriptions": len(relations),
        "vocab_size_min_freq_2": len(entries),
        "sha256": {
            "corpus.jsonl": sha256(corpus_path),
            "relations.jsonl": sha256(relations_path),
        },
    }
    out_path = fixture_dir / "manifest.json"
    if check:
        committed = json.loads(out_path.read_text())
        if committed != manifest:
            for key in sorted(set(committed) | set(manifest)):
                if committed.get(key) != manifest.get(key):
                    print(f"mismatch at {key}: committed {committed.get(key)!r}, "
                          f"recomputed {manifest.get(key)!r}")
            sys.exit(1)
        print(f"{out_path} matches the fixture")
    else:
        out_path.write_text(json.dumps(manifest, indent=2) + "\n")
        print(f"wrote {out_path}")


if __name__ == "__main__":
    main()
