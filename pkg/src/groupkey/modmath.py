"""Number-theoretic substrate: modular exponentiation, primality, Euler's totient.

Naturals are plain Python ``int`` values (arbitrary precision, ``>= 0``).
"""

from __future__ import annotations

import math
import random
from collections import Counter
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Literal

KeyMode = Literal["prime", "general"]

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
# Bases 2..37 are a deterministic Miller-Rabin witness set below 3.3e24.
_DETERMINISTIC_LIMIT = 3_317_044_064_679_887_385_961_981
# 12 fixed + 20 pseudo-random rounds: error <= 4**-32 = 2**-64 above the limit.
_EXTRA_ROUNDS = 20


class DomainError(ValueError):
    """An argument lies outside the operation's mathematical domain."""


class TotientBudgetExceeded(ArithmeticError):
    """Factoring the argument of the totient would exceed the configured budget."""

    def __init__(self, k: int, cofactor: int):
        super().__init__(f"cannot factor {k}: composite cofactor {cofactor} left over budget")
        self.k = k
        self.cofactor = cofactor


_op_counts: ContextVar[Counter | None] = ContextVar("groupkey_op_counts", default=None)


@contextmanager
def count_ops() -> Iterator[Counter]:
    """Count ``mod_exp`` and ``factorize`` calls made inside the block."""
    counts: Counter = Counter()
    token = _op_counts.set(counts)
    try:
        yield counts
    finally:
        _op_counts.reset(token)


def _tick(name: str) -> None:
    counts = _op_counts.get()
    if counts is not None:
        counts[name] += 1


def mod_exp(base: int, exponent: int, modulus: int) -> int:
    """Return ``base**exponent mod modulus`` by square-and-multiply."""
    if modulus < 2:
        raise DomainError(f"modulus must be >= 2, got {modulus}")
    if exponent < 0 or base < 0:
        raise DomainError("base and exponent must be natural numbers")
    _tick("mod_exp")
    # builtin pow is left-to-right square-and-multiply for int operands
    return pow(base, exponent, modulus)


def _miller_rabin(n: int, bases) -> bool:
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in bases:
        a %= n
        if a in (0, 1, n - 1):
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_prime(k: int) -> bool:
    """Primality test, deterministic below 2**64 (and well beyond).

    Above ``3.3e24`` twenty extra bases drawn from a generator seeded with
    ``k`` are used, so the answer is reproducible and wrong with probability
    below 2**-64.
    """
    if k < 2:
        return False
    for p in _SMALL_PRIMES:
        if k % p == 0:
            return k == p
    if not _miller_rabin(k, _SMALL_PRIMES):
        return False
    if k < _DETERMINISTIC_LIMIT:
        return True
    rng = random.Random(k)
    return _miller_rabin(k, (rng.randrange(2, k - 1) for _ in range(_EXTRA_ROUNDS)))


@lru_cache(maxsize=4)
def _primes_upto(limit: int) -> tuple[int, ...]:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytes(len(range(i * i, limit + 1, i)))
    return tuple(i for i, flag in enumerate(sieve) if flag)


@dataclass(frozen=True)
class FactorBudget:
    """Effort allowed when factoring a totient argument.

    ``trial_limit`` bounds the trial-division primes.  ``rho_iterations``
    bounds Pollard-Brent work per split of a remaining composite; set it to 0
    for pure trial division.
    """

    trial_limit: int = 1 << 20
    rho_iterations: int = 1 << 20


DEFAULT_BUDGET = FactorBudget()
# trial division runs this far before rho takes over (when rho is enabled)
_PRE_RHO_LIMIT = 1 << 10


def _pollard_brent(n: int, max_iter: int, seed: int) -> int | None:
    """Return a nontrivial factor of odd composite ``n`` or None."""
    rng = random.Random(seed)
    for _attempt in range(8):
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        spent = 0
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
            spent += r
            if spent > max_iter:
                break
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if 1 < g < n:
            return g
    return None


def factorize(k: int, budget: FactorBudget = DEFAULT_BUDGET) -> dict[int, int]:
    """Prime factorization of ``k >= 1`` as ``{prime: exponent}``."""
    if k < 1:
        raise DomainError(f"cannot factor {k}")
    _tick("factorize")
    factors: Counter = Counter()
    rest = k
    limit = budget.trial_limit
    if budget.rho_iterations > 0:
        limit = min(limit, _PRE_RHO_LIMIT)
    for p in _primes_upto(max(limit, 2)):
        if p * p > rest:
            break
        while rest % p == 0:
            factors[p] += 1
            rest //= p
    if rest == 1:
        return dict(factors)
    pending = [rest]
    while pending:
        n = pending.pop()
        if n == 1:
            continue
        if is_prime(n):
            factors[n] += 1
            continue
        if math.isqrt(n) ** 2 == n:
            pending += [math.isqrt(n)] * 2
            continue
        d = None
        if budget.rho_iterations > 0:
            d = _pollard_brent(n, budget.rho_iterations, seed=n)
        if d is None:
            raise TotientBudgetExceeded(k, n)
        pending += [d, n // d]
    return dict(factors)


def euler_totient(k: int, budget: FactorBudget = DEFAULT_BUDGET) -> int:
    """phi(k); primes short-circuit to ``k - 1`` without any factoring."""
    if k < 1:
        raise DomainError(f"totient undefined for {k}")
    if k == 1:
        return 1
    return _totient(k, budget)


# every member of a group folds the same node secrets, so results repeat a lot;
# factorize calls are only counted on a cache miss
@lru_cache(maxsize=1 << 16)
def _totient(k: int, budget: FactorBudget) -> int:
    if is_prime(k):
        return k - 1
    phi = k
    for p in factorize(k, budget):
        phi = phi // p * (p - 1)
    return phi


@dataclass(frozen=True)
class GroupParams:
    """Public prime modulus ``p`` and base ``y`` of the one-way map y**x mod p."""

    p: int
    y: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise DomainError(f"modulus {self.p} is not prime")
        if not 2 <= self.y < self.p:
            raise DomainError(f"base must satisfy 2 <= y < p, got y={self.y}")

    @property
    def bits(self) -> int:
        return self.p.bit_length()


def gen_secret_key(
    params: GroupParams,
    rng_seed: int,
    mode: KeyMode = "prime",
    budget: FactorBudget = DEFAULT_BUDGET,
) -> int:
    """Draw a secret key in ``[1, p)`` deterministically from ``rng_seed``.

    Prime mode only returns primes, so phi(K) = K - 1 costs nothing.
    General mode returns any element whose totient fits ``budget``.
    """
    rng = random.Random(rng_seed)
    if mode == "prime":
        if params.p < 3:
            raise DomainError("no prime lies in [2, p) for p = 2")
        while True:
            k = rng.randrange(2, params.p)
            if is_prime(k):
                return k
    if mode == "general":
        while True:
            k = rng.randrange(1, params.p)
            try:
                euler_totient(k, budget)
            except TotientBudgetExceeded:
                continue
            return k
    raise DomainError(f"unknown key mode {mode!r}")


def clear_caches() -> None:
    """Forget memoized totients (for timing runs that must pay the full cost)."""
    _totient.cache_clear()
