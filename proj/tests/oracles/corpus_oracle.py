"""Generates the 200-sentence fixture and prints independent tallies.

Word counts use str.split(); statistics use the statistics module.
"""
import random
import statistics
import sys
from pathlib import Path

WORDS = ("inflation growth repo rate liquidity banks credit policy stance "
         "committee outlook prices food fuel exports reserves rupee demand").split()

def make_fixture(path):
    rng = random.Random(20240611)
    lines = []
    for i in range(200):
        n = rng.choice([1, 2, 2, 3, 4, 5, 6, 8, 9, 11, 12, 14, 17, 21])
        words = [rng.choice(WORDS) for _ in range(n)]
        words[0] = words[0].capitalize()
        lines.append(" ".join(words) + ".")
    path.write_text("\n".join(lines) + "\n")

def main():
    path = Path(__file__).resolve().parent.parent / "data" / "sentences200.txt"
    if "--regen" in sys.argv or not path.exists():
        make_fixture(path)
    lines = [l for l in path.read_text().splitlines() if l.strip()]
    counts = [len(l.split()) for l in lines]
    print("n_sentences", len(counts))
    print("kept_min3", sum(1 for c in counts if c >= 3))
    print("kept_min5", sum(1 for c in counts if c >= 5))
    print("total_words", sum(counts))
    print("n_paragraphs(groups of 5)", (len(counts) + 4) // 5)
    print("avg", repr(sum(counts) / len(counts)))
    print("mean", repr(statistics.mean(counts)))
    print("median", statistics.median(counts))
    print("mode(smallest)", min(statistics.multimode(counts)))
    kept = [c for c in counts if c >= 3]
    print("filtered_total_words", sum(kept))
    print("filtered_paragraphs", len({i // 5 for i, c in enumerate(counts) if c >= 3}))

main()
