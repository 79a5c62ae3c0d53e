"""Benchmark generators: the resettable counter family and seeded random circuits."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .aiger import CONTROLLABLE_PREFIX, AigFile


class AigBuilder:
    """Allocates inputs and latches first, then structurally hashed AND gates."""

    def __init__(self, n_inputs: int, n_latches: int):
        self.n_inputs = n_inputs
        self.n_latches = n_latches
        self.next_var = n_inputs + n_latches + 1
        self.ands: list[tuple[int, int, int]] = []
        self._strash: dict[tuple[int, int], int] = {}

    def input(self, k: int) -> int:
        return 2 * (k + 1)

    def latch(self, k: int) -> int:
        return 2 * (self.n_inputs + k + 1)

    def AND(self, a: int, b: int) -> int:
        if a == 0 or b == 0 or a == b ^ 1:
            return 0
        if a == 1 or a == b:
            return b
        if b == 1:
            return a
        if a < b:
            a, b = b, a
        key = (a, b)
        if key not in self._strash:
            lhs = 2 * self.next_var
            self.next_var += 1
            self.ands.append((lhs, a, b))
            self._strash[key] = lhs
        return self._strash[key]

    def OR(self, a: int, b: int) -> int:
        return self.AND(a ^ 1, b ^ 1) ^ 1

    def XOR(self, a: int, b: int) -> int:
        return self.AND(self.AND(a, b) ^ 1, self.AND(a ^ 1, b ^ 1) ^ 1)

    def build(self, latch_next: list[int], output: int) -> AigFile:
        return AigFile(max_var=self.next_var - 1,
                       inputs=[self.input(k) for k in range(self.n_inputs)],
                       latches=[(self.latch(k), nxt) for k, nxt in enumerate(latch_next)],
                       outputs=[output], ands=list(self.ands))


def gen_cnt(n: int) -> AigFile:
    """n-bit counter: ``inc`` adds one, ``controllable_reset`` clears it.

    The error latch is raised once the counter holds all ones and then stays
    up, so the controller wins by resetting before the counter overflows.
    """
    if not 1 <= n <= 30:
        raise ValueError("counter width must be in 1..30")
    b = AigBuilder(n_inputs=2, n_latches=n + 1)
    inc, reset = b.input(0), b.input(1)
    bits = [b.latch(k) for k in range(n)]
    err = b.latch(n)
    carry = inc
    nexts = []
    for bit in bits:
        nexts.append(b.AND(reset ^ 1, b.XOR(bit, carry)))
        carry = b.AND(bit, carry)
    full = 1
    for bit in bits:
        full = b.AND(full, bit)
    nexts.append(b.OR(err, full))
    aig = b.build(nexts, err)
    aig.symbols[("i", 0)] = "inc"
    aig.symbols[("i", 1)] = CONTROLLABLE_PREFIX + "reset"
    for k in range(n):
        aig.symbols[("l", k)] = f"cnt<{k}>"
    aig.symbols[("l", n)] = "err"
    aig.symbols[("o", 0)] = "err"
    return aig


@dataclass
class RandomGameParams:
    n_latches: int
    n_u: int
    n_c: int
    n_ands: int
    latching_bad: bool


def random_aig(rng: random.Random, params: RandomGameParams) -> AigFile:
    nl = params.n_latches
    n_inputs = params.n_u + params.n_c
    b = AigBuilder(n_inputs=n_inputs, n_latches=nl)
    pool = [b.input(k) for k in range(n_inputs)] + [b.latch(k) for k in range(nl)]
    if params.latching_bad:
        # the last latch is the error latch; keep it out of the gate pool
        pool = pool[:-1] or pool
    gates = []
    for _ in range(params.n_ands):
        x = rng.choice(pool) ^ rng.getrandbits(1)
        y = rng.choice(pool) ^ rng.getrandbits(1)
        g = b.AND(x, y)
        if g > 1:
            pool.append(g)
            gates.append(g)
    sources = gates or pool

    def pick():
        return rng.choice(pool) ^ rng.getrandbits(1)

    if params.latching_bad:
        err = b.latch(nl - 1)
        nexts = [pick() for _ in range(nl - 1)]
        nexts.append(b.OR(err, rng.choice(sources) ^ rng.getrandbits(1)))
        output = err
    else:
        nexts = [pick() for _ in range(nl)]
        output = rng.choice(sources) ^ rng.getrandbits(1)
    aig = b.build(nexts, output)
    for k in range(params.n_u):
        aig.symbols[("i", k)] = f"u{k}"
    for k in range(params.n_c):
        aig.symbols[("i", params.n_u + k)] = f"{CONTROLLABLE_PREFIX}c{k}"
    return aig


def random_corpus(seed: int, count: int, *, max_latches: int = 6, max_u: int = 2, max_c: int = 2):
    """Yield ``(name, AigFile)`` pairs; the game has at most ``max_latches`` latches.

    When the bad output is not itself a latching latch an error latch gets
    added during encoding, so such circuits get one file latch fewer.
    """
    rng = random.Random(seed)
    for k in range(count):
        latching = rng.random() < 0.4
        n_latches = rng.randint(1 if not latching else 2, max_latches if latching else max_latches - 1)
        params = RandomGameParams(
            n_latches=n_latches,
            n_u=rng.randint(1, max_u),
            n_c=rng.randint(1, max_c),
            n_ands=rng.randint(2, 4 + 2 * n_latches),
            latching_bad=latching,
        )
        yield f"rand-{seed}-{k:04d}", random_aig(rng, params)
