"""Independent reference values for the frozen constants in the unit tests.

Implements the documented generator from scratch (pure Python integers) and
uses numpy's LAPACK QR for the fallback mixer. Run: python3 rng_oracle.py
"""
import math

import numpy as np

M64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix(z):
    z &= M64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & M64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & M64
    z ^= z >> 31
    return z


def derive(seed, tag):
    return mix(seed ^ mix(tag + GOLDEN))


class Stream:
    def __init__(self, seed):
        self.seed, self.i, self.spare = seed, 0, None

    def u64(self):
        self.i += 1
        return mix(self.seed + self.i * GOLDEN)

    def uniform(self):
        return (self.u64() >> 11) * 2.0**-53

    def gaussian(self):
        if self.spare is not None:
            v, self.spare = self.spare, None
            return v
        u1 = ((self.u64() >> 11) + 1) * 2.0**-53
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        self.spare = r * math.sin(2 * math.pi * u2)
        return r * math.cos(2 * math.pi * u2)


def rademacher(seed, d):
    s = Stream(seed)
    return [-1 if s.u64() >> 63 else 1 for _ in range(d)]


def qr_orthogonal(seed, b):
    s = Stream(seed)
    a = np.array([[s.gaussian() for _ in range(b)] for _ in range(b)])
    q, r = np.linalg.qr(a)
    return q * np.sign(np.diag(r))


if __name__ == "__main__":
    s = Stream(0)
    print("u64 seed 0:", [hex(s.u64()) for _ in range(3)])
    s = Stream(42)
    print("uniform seed 42:", [repr(s.uniform()) for _ in range(2)])
    s = Stream(42)
    print("gaussian seed 42:", [repr(s.gaussian()) for _ in range(4)])
    print("derive(1, 0x55):", hex(derive(1, 0x55)))
    print("rademacher(7, 16):", rademacher(7, 16))
    big = rademacher(2024, 100000)
    print("rademacher(2024, 1e5) mean:", sum(big) / len(big))
    fb = derive(0x4841525046424B31, 3)
    print("fallback seed b=3:", hex(fb))
    np.set_printoptions(precision=17)
    print("fallback mixer b=3:\n", repr(qr_orthogonal(fb, 3)))
