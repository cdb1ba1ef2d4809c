#!/usr/bin/env python3
"""Independent NIST SP 800-56A one-step KDF (SHA-256, 4-byte BE counter from 1,
label as OtherInfo) and the key-chain constructions built on it.

Prints C++ fixture constants; the values are frozen into fixtures.hpp.
"""
import hashlib

P224_ORDER = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFF16A2E0B8F03E13DD29455C5C2A3D


def kdf(secret: bytes, label: bytes, out_len: int) -> bytes:
    out = b""
    counter = 1
    while len(out) < out_len:
        out += hashlib.sha256(counter.to_bytes(4, "big") + secret + label).digest()
        counter += 1
    return out[:out_len]


def ratchet(sk: bytes) -> bytes:
    return kdf(sk, b"update", 32)


def diversify(sk: bytes):
    label = b"diversify"
    attempt = 0
    while True:
        material = kdf(sk, label, 72)
        u = int.from_bytes(material[:36], "big") % P224_ORDER
        v = int.from_bytes(material[36:], "big") % P224_ORDER
        if u != 0:
            return u, v
        attempt += 1
        label = b"diversify-retry-%d" % attempt


def main():
    zero = bytes(32)
    print("// kdf(0x00*32, \"update\", 32)")
    print(f'"{kdf(zero, b"update", 32).hex()}"')
    print("// kdf(0x00*32, \"diversify\", 32)")
    print(f'"{kdf(zero, b"diversify", 32).hex()}"')
    print("// kdf(0x00*32, \"update\", 80) - multi-block")
    print(f'"{kdf(zero, b"update", 80).hex()}"')

    sk = zero
    for _ in range(10):
        sk = ratchet(sk)
    print("// ratchet^10(0x00*32)")
    print(f'"{sk.hex()}"')

    ab = bytes([0xAB] * 32)
    u, v = diversify(ab)
    print("// diversify(0xAB*32): u, v (28-byte big-endian hex)")
    print(f'"{u.to_bytes(28, "big").hex()}"')
    print(f'"{v.to_bytes(28, "big").hex()}"')


if __name__ == "__main__":
    main()
