#!/usr/bin/env python3
"""Independent reference for the keyed toy hash and the seeded shuffle.

Uses Python big integers reduced mod 2**64 so it shares no code path with the
Rust implementation. Regenerates crates/core/fixtures/*.txt when run with
--write; otherwise prints the vectors.
"""
import sys
from pathlib import Path

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(s):
    s = (s + GOLDEN) & MASK
    z = s
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    z = z ^ (z >> 31)
    return z, s


def keyed_hash(key, msg, hash_len):
    assert hash_len >= 1
    state = key
    for i, b in enumerate(msg):
        state, _ = mix64(state ^ (b + 0x100 * (i % 251)))
    words = -(-hash_len // 64)
    acc = 0
    s = state
    for _ in range(words):
        z, s = mix64(s)
        acc = (acc << 64) | z
    total = 64 * words
    bits = [(acc >> (total - 1 - k)) & 1 for k in range(hash_len)]
    return bits


def bits_to_hex(bits):
    padded = bits + [0] * ((-len(bits)) % 4)
    out = ""
    for k in range(0, len(padded), 4):
        v = padded[k] << 3 | padded[k + 1] << 2 | padded[k + 2] << 1 | padded[k + 3]
        out += "%x" % v
    return out


def shuffled(l, n):
    arr = list(range(n))
    s = l
    for i in range(n - 1, 0, -1):
        z, s = mix64(s)
        j = z % (i + 1)
        arr[i], arr[j] = arr[j], arr[i]
    return arr


def sampling_positions(l, n_total, n_sampling):
    assert 0 <= n_sampling <= n_total
    return shuffled(l, n_total)[:n_sampling]


HASH_CASES = [
    (0x0, b"", 16),
    (0x0, b"x", 16),
    (0x0123456789ABCDEF, b"x", 16),
    (0x0123456789ABCDEF, b"abc", 1),
    (0x0123456789ABCDEF, b"abc", 7),
    (0x0123456789ABCDEF, b"abc", 32),
    (0x0123456789ABCDEF, b"abc", 64),
    (0x0123456789ABCDEF, b"abc", 65),
    (0xFFFFFFFFFFFFFFFF, b"hello world", 128),
    (0xDEADBEEFCAFEF00D, bytes(range(256)), 200),
    (0x2A, b"secret input x", 32),
    (0x2A, b"secret input y", 32),
]

PERM_CASES = [
    (42, 10, 4),
    (42, 10, 0),
    (42, 10, 10),
    (0, 1, 1),
    (1, 16, 8),
    (7, 32, 16),
    (0xFFFFFFFFFFFFFFFF, 64, 20),
    (0x123456789, 100, 37),
]


def hash_lines():
    lines = ["# key_hex msg_hex(- for empty) hash_len digest_hex"]
    for key, msg, length in HASH_CASES:
        m = msg.hex() if msg else "-"
        lines.append("%016x %s %d %s" % (key, m, length, bits_to_hex(keyed_hash(key, msg, length))))
    return lines


def perm_lines():
    lines = ["# l_hex n_total n_sampling positions(shuffle prefix order, - for empty)"]
    for l, n, k in PERM_CASES:
        pos = sampling_positions(l, n, k)
        lines.append("%016x %d %d %s" % (l, n, k, ",".join(map(str, pos)) if pos else "-"))
    return lines


def main():
    if "--write" in sys.argv:
        root = Path(__file__).resolve().parent.parent / "crates" / "core" / "fixtures"
        (root / "hash_vectors.txt").write_text("\n".join(hash_lines()) + "\n")
        (root / "permutation_vectors.txt").write_text("\n".join(perm_lines()) + "\n")
        return
    print("mix64(0) = %#018x" % mix64(0)[0])
    s = 1
    for _ in range(4):
        z, s = mix64(s)
        print("stream(1) -> %#018x" % z)
    print("\n".join(hash_lines()))
    print("\n".join(perm_lines()))


if __name__ == "__main__":
    main()
