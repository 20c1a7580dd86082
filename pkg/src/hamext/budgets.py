"""Symbolic corruption budgets.

A budget maps a length n to a nonnegative integer allowance, rounding
up. Four kinds, serialized as ``kind:params`` tokens:

* ``power:a/b[:coeff]``      coeff * n^(a/b)
* ``affine_sqrt:a:c``        a*n + c*sqrt(n)
* ``table:n0=v0,n1=v1,...``  step function (``table:v`` = constant v)
* ``lil:eps``                n/2 + (1-eps)*sqrt(2 n lnln max(n,16))

Power and affine_sqrt take rational parameters and evaluate with exact
integer arithmetic, so ceilings at exact powers (e.g. 4096^(2/3)) never
wobble. A budget that grows faster than sqrt(n) carries a divergence
modulus: divergence_modulus(k) returns an N with value(n) >= k*sqrt(n)
for every n >= N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError


def _iroot(x: int, q: int) -> int:
    """floor(x ** (1/q)) for x >= 0, exact."""
    if x < 0:
        raise DomainError("negative radicand")
    if q == 1 or x in (0, 1):
        return x
    r = max(1, int(round(x ** (1.0 / q))) if x.bit_length() < 512
            else 1 << -(-x.bit_length() // q))
    while True:
        rq = r ** q
        if rq <= x < (r + 1) ** q:
            return r
        r = ((q - 1) * r + x // r ** (q - 1)) // q
        if r < 1:
            r = 1


def _ceil_power(n: int, alpha: Fraction, coeff: Fraction) -> int:
    """Smallest m with m >= coeff * n^alpha, exact."""
    if n == 0 or coeff == 0:
        return 0
    p, q = alpha.numerator, alpha.denominator
    target = coeff.numerator ** q * n ** p
    den = coeff.denominator ** q
    m = _iroot(target // den, q)
    while m > 0 and m ** q * den >= target:
        m -= 1
    m += 1
    while m ** q * den < target:
        m += 1
    return m


def _ceil_affine_sqrt(n: int, a: Fraction, c: Fraction) -> int:
    """Smallest m with m >= a*n + c*sqrt(n), exact."""
    def reaches(m: int) -> bool:
        lead = Fraction(m) - a * n
        if lead < 0:
            return False
        return lead * lead >= c * c * n

    m = max(0, math.floor(float(a) * n + float(c) * math.sqrt(n)) - 2)
    while reaches(m) and m > 0:
        m -= 1
    if reaches(m):
        return m
    while not reaches(m):
        m += 1
    return m


def lil_envelope(n: int, eps: float) -> float:
    lam = math.log(math.log(max(n, 16)))
    return n / 2.0 + (1.0 - eps) * math.sqrt(2.0 * n * lam)


@dataclass(frozen=True)
class BudgetFunction:
    kind: str
    params: tuple

    def __call__(self, n: int) -> int:
        if n < 0:
            raise DomainError("budgets are evaluated at nonnegative lengths")
        if self.kind == "power":
            alpha, coeff = self.params
            return _ceil_power(n, alpha, coeff)
        if self.kind == "affine_sqrt":
            a, c = self.params
            return _ceil_affine_sqrt(n, a, c)
        if self.kind == "table":
            value = self.params[0][1]
            for bp, v in self.params:
                if n >= bp:
                    value = v
            return value
        # lil
        return math.ceil(lil_envelope(n, self.params[0]))

    @property
    def is_bounded(self) -> bool:
        if self.kind == "table":
            return True
        if self.kind == "power":
            alpha, coeff = self.params
            return alpha == 0 or coeff == 0
        if self.kind == "affine_sqrt":
            a, c = self.params
            return a == 0 and c == 0
        return False

    def divergence_modulus(self, k: int):
        """Witness N(k) for value(n)/sqrt(n) -> infinity, or None.

        Guarantees value(n) >= k*sqrt(n) for all n >= N(k); the raw
        envelope (before ceiling) is already >= k*sqrt(n) there and the
        ratio is monotone for every unbounded kind, so checking the
        closed-form threshold suffices.
        """
        if k <= 0:
            return 1
        if self.kind == "power":
            alpha, coeff = self.params
            if alpha <= Fraction(1, 2) or coeff <= 0:
                return None
            # coeff * n^(alpha - 1/2) >= k  at integer n
            ex = alpha - Fraction(1, 2)
            p, q = ex.numerator, ex.denominator
            target = (Fraction(k) / coeff) ** q
            num = -(-target.numerator // target.denominator)  # ceil
            return max(1, _iroot(max(num - 1, 0), p) + 1)
        if self.kind == "affine_sqrt":
            a, c = self.params
            if a <= 0:
                return None
            # a*sqrt(n) + c >= k  <=  n >= ((k - c)/a)^2
            rem = Fraction(k) - c
            if rem <= 0:
                return 1
            bound = (rem / a) ** 2
            return -(-bound.numerator // bound.denominator)
        if self.kind == "lil":
            # value/sqrt(n) >= sqrt(n)/2
            return 4 * k * k
        return None

    @property
    def token(self) -> str:
        if self.kind == "power":
            alpha, coeff = self.params
            tok = f"power:{alpha}"
            if coeff != 1:
                tok += f":{coeff}"
            return tok
        if self.kind == "affine_sqrt":
            a, c = self.params
            return f"affine_sqrt:{a}:{c}"
        if self.kind == "table":
            if len(self.params) == 1 and self.params[0][0] == 0:
                return f"table:{self.params[0][1]}"
            return "table:" + ",".join(f"{n}={v}" for n, v in self.params)
        return f"lil:{self.params[0]!r}"

    def __str__(self):
        return self.token


def power_budget(alpha, coeff=1) -> BudgetFunction:
    alpha, coeff = Fraction(alpha), Fraction(coeff)
    if alpha < 0 or coeff < 0:
        raise DomainError("power budget needs nonnegative exponent and coefficient")
    return BudgetFunction("power", (alpha, coeff))


def affine_sqrt_budget(a, c) -> BudgetFunction:
    a, c = Fraction(a), Fraction(c)
    if a < 0 or c < 0:
        raise DomainError("affine_sqrt budget needs nonnegative parameters")
    return BudgetFunction("affine_sqrt", (a, c))


def table_budget(entries) -> BudgetFunction:
    if isinstance(entries, int):
        entries = [(0, entries)]
    entries = sorted((int(n), int(v)) for n, v in entries)
    if not entries:
        raise DomainError("table budget needs at least one entry")
    values = [v for _, v in entries]
    if any(v < 0 for v in values) or values != sorted(values):
        raise DomainError("table budget values must be nonnegative and nondecreasing")
    return BudgetFunction("table", tuple(entries))


def lil_budget(eps: float) -> BudgetFunction:
    if not 0 <= eps <= 1:
        raise DomainError("lil budget needs 0 <= eps <= 1")
    return BudgetFunction("lil", (float(eps),))


def parse_budget(token: str) -> BudgetFunction:
    """Parse a ``kind:params`` token (see module docstring)."""
    kind, _, rest = token.strip().partition(":")
    try:
        if kind == "power":
            parts = rest.split(":")
            return power_budget(Fraction(parts[0]),
                                Fraction(parts[1]) if len(parts) > 1 else 1)
        if kind == "affine_sqrt":
            a, c = rest.split(":")
            return affine_sqrt_budget(Fraction(a), Fraction(c))
        if kind == "table":
            if "=" not in rest:
                return table_budget(int(rest))
            return table_budget(tuple(
                (int(p.split("=")[0]), int(p.split("=")[1]))
                for p in rest.split(",")))
        if kind == "lil":
            return lil_budget(float(rest))
    except (ValueError, IndexError, ZeroDivisionError) as exc:
        raise DomainError(f"malformed budget token {token!r}: {exc}") from None
    raise DomainError(f"unknown budget kind {kind!r}")
