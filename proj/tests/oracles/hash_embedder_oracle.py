"""Re-implements the signed token-hashing embedder in pure Python and prints
the frozen cosine similarities used by embedding_test.cpp."""
import math
import re

M64 = (1 << 64) - 1

def fnv1a64(s):
    h = 0xcbf29ce484222325
    for b in s.encode():
        h ^= b
        h = (h * 0x100000001b3) & M64
    return h

def splitmix64(x):
    x = (x + 0x9e3779b97f4a7c15) & M64
    x = ((x ^ (x >> 30)) * 0xbf58476d1ce4e5b9) & M64
    x = ((x ^ (x >> 27)) * 0x94d049bb133111eb) & M64
    return x ^ (x >> 31)

def embed(text, dim, seed):
    salt = splitmix64(seed)
    toks = [t.lower() for t in re.findall(r"[A-Za-z0-9_\x80-￿]+", text)]
    v = [0.0] * dim
    for t in toks:
        h = splitmix64(fnv1a64(t) ^ salt)
        sign = -1.0 if h >> 63 else 1.0
        v[(h & 0x7fffffffffffffff) % dim] += sign
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]

def cos(a, b):
    return sum(x * y for x, y in zip(a, b))

for seed in (0, 7):
    a = embed("inflation rose", 64, seed)
    b = embed("cricket match", 64, seed)
    print(f"seed={seed} cos(inflation rose, cricket match)={cos(a, b)!r}")
a = embed("inflation rose sharply", 64, 0)
b = embed("inflation rose", 64, 0)
print("seed=0 cos(inflation rose sharply, inflation rose)=", repr(cos(a, b)))
print("seed=0 nonzero idx 'inflation rose':", [i for i, x in enumerate(embed("inflation rose", 64, 0)) if x])
