"""Brute-force class-based TF-IDF on 20 seeded toy corpora.

Each topic's sentences are concatenated into one document; for every word
and topic the score is (count in topic / words in topic) * log(T / topics
containing the word).  Writes tests/data/ctfidf_oracle.json.
"""
import json
import math
import pathlib
import random
import re

WORDS = ["rate", "repo", "inflation", "growth", "credit", "liquidity", "rupee", "fiscal",
         "deficit", "banks", "food", "fuel", "core", "policy", "stance", "monsoon", "exports",
         "demand", "supply", "yield", "bond", "forex", "reserves", "covid", "the", "of", "a", "x"]


def tokens(text):
    return re.findall(r"[a-z0-9_]{2,}", text.lower())


def brute_force(topics):
    docs = {t: [] for t in topics}
    for t, sents in topics.items():
        for s in sents:
            docs[t].extend(tokens(s))
    vocab = sorted({w for d in docs.values() for w in d})
    T = len(topics)
    scores = {}
    for w in vocab:
        df = sum(1 for d in docs.values() if w in d)
        for t, d in docs.items():
            c = d.count(w)
            scores[(w, t)] = (c / len(d)) * math.log(T / df) if c else 0.0
    return vocab, scores


def make_corpus(rng):
    n_topics = rng.randint(1, 5)
    ids = sorted(rng.sample(range(0, 12), n_topics))
    budget = rng.randint(n_topics * 3, 1000)
    topics = {}
    per = budget // n_topics
    for t in ids:
        sents = []
        used = 0
        vocab = rng.sample(WORDS, rng.randint(3, len(WORDS)))
        while used < per:
            k = rng.randint(1, 12)
            words = [rng.choice(vocab) for _ in range(k)]
            if rng.random() < 0.3:
                words = [w.upper() if rng.random() < 0.5 else w for w in words]
            sep = rng.choice([" ", " ", ", ", "; "])
            sents.append(sep.join(words) + rng.choice([".", "!", "?", ""]))
            used += k
        topics[t] = sents
    return topics


def main():
    rng = random.Random(20240612)
    cases = []
    for _ in range(20):
        topics = make_corpus(rng)
        vocab, scores = brute_force(topics)
        cases.append({
            "topics": {str(t): s for t, s in topics.items()},
            "vocabulary": vocab,
            "scores": [[scores[(w, t)] for t in topics] for w in vocab],
        })
    out = pathlib.Path(__file__).resolve().parents[1] / "data" / "ctfidf_oracle.json"
    out.write_text(json.dumps({"cases": cases}, indent=None) + "\n")
    print(f"wrote {len(cases)} cases to {out}")


if __name__ == "__main__":
    main()
