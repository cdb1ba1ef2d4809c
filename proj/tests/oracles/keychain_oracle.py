#!/usr/bin/env python3
"""Independent key-chain oracle: derives epoch key pairs from a fixture
master record using python-cryptography's P-224 arithmetic, never touching
the C++ implementation. Emits the fixture record (text form) and golden
epoch values for epochs 0, 1, 7.
"""
import hashlib

from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.hazmat.primitives.serialization import (
    Encoding,
    PublicFormat,
)
from kdf_oracle import P224_ORDER, diversify, kdf, ratchet

# Fixture master secrets (arbitrary but fixed).
D_MASTER = 0x1F2E3D4C5B6A798800112233445566778899AABBCCDDEE0102030405
SK0 = bytes(range(32))
CREATED_AT = 0


def compressed(pub) -> bytes:
    return pub.public_bytes(Encoding.X962, PublicFormat.CompressedPoint)


def pub_of(priv_int: int) -> bytes:
    key = ec.derive_private_key(priv_int, ec.SECP224R1())
    return compressed(key.public_key())


def epoch(i: int):
    sk = SK0
    for _ in range(i):
        sk = ratchet(sk)
    u, v = diversify(sk)
    d_i = (u * D_MASTER + v) % P224_ORDER
    p_i = pub_of(d_i)
    index = hashlib.sha256(p_i).hexdigest()
    return u, v, d_i, p_i, index


def main():
    print("// master record text form")
    print(f'"d={D_MASTER.to_bytes(28, "big").hex()}\\n"')
    print(f'"P={pub_of(D_MASTER).hex()}\\n"')
    print(f'"sk0={SK0.hex()}\\n"')
    print(f'"created_at={CREATED_AT}\\n"')
    for i in (0, 1, 7):
        u, v, d_i, p_i, index = epoch(i)
        print(f"// epoch {i}: u, v, d_i (28B hex), P_i (29B hex), index")
        print(f'"{u.to_bytes(28, "big").hex()}"')
        print(f'"{v.to_bytes(28, "big").hex()}"')
        print(f'"{d_i.to_bytes(28, "big").hex()}"')
        print(f'"{p_i.hex()}"')
        print(f'"{index}"')


if __name__ == "__main__":
    main()
