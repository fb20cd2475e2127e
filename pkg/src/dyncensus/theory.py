"""Closed-form class counts and upper bounds for the map families.

Exact formulas exist for the linear, pure-power, and Frobenius-affine
families; the remaining families get upper bounds derived from orbit
counting under coefficient scalings, affine substitutions, or the
Frobenius action on coefficient vectors.  Everything is evaluated in
exact integer/rational arithmetic; the one bound involving square and
cube roots is bracketed by shrinking rational intervals until its
ceiling is determined, so no comparison can be perturbed by floating
point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .gfq import factorize, is_prime


class InvalidParametersError(ValueError):
    pass


class DivisionUndefinedError(ValueError):
    """The orbit-counting reduction degenerates (numerator degree = denominator degree + 1)."""


# -- elementary arithmetic functions --


def divisors(n: int) -> list[int]:
    if n < 1:
        raise InvalidParametersError(f"divisors of {n} undefined")
    out = [1]
    for prime, exp in factorize(n).items():
        out = [d * prime**e for d in out for e in range(exp + 1)]
    return sorted(out)


def divisor_count(n: int) -> int:
    if n < 1:
        raise InvalidParametersError(f"divisor count of {n} undefined")
    return math.prod(e + 1 for e in factorize(n).values())


def euler_phi(n: int) -> int:
    if n < 1:
        raise InvalidParametersError(f"totient of {n} undefined")
    out = n
    for prime in factorize(n):
        out = out // prime * (prime - 1)
    return out


def mobius(n: int) -> int:
    if n < 1:
        raise InvalidParametersError(f"mobius of {n} undefined")
    fac = factorize(n)
    if any(e > 1 for e in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


def characteristic_of(q: int) -> tuple[int, int]:
    """Split a prime power q into (p, k); rejects non-prime-powers."""
    fac = factorize(q)
    if len(fac) != 1:
        raise InvalidParametersError(f"{q} is not a prime power")
    ((p, k),) = fac.items()
    return p, k


# -- exact rational bracketing of r-th roots --


def _iroot(n: int, r: int) -> int:
    if n < 0:
        raise ValueError("negative radicand")
    if r == 2:
        return math.isqrt(n)
    x = int(round(n ** (1.0 / r))) + 2
    while x**r > n:
        x -= 1
    while (x + 1) ** r <= n:
        x += 1
    return x


def _root_interval(n: int, r: int, bits: int) -> tuple[Fraction, Fraction]:
    """Fractions lo <= n^(1/r) <= hi with hi - lo <= 2^-bits (0 when exact)."""
    root = _iroot(n, r)
    if root**r == n:
        return Fraction(root), Fraction(root)
    scaled = _iroot(n << (r * bits), r)
    lo = Fraction(scaled, 1 << bits)
    return lo, lo + Fraction(1, 1 << bits)


def _ceil_of_interval(value_at) -> int:
    """Ceiling of a real given by nested rational intervals value_at(bits)."""
    bits = 32
    while True:
        lo, hi = value_at(bits)
        if lo == hi:
            return math.ceil(lo)
        clo, chi = math.ceil(lo), math.ceil(hi)
        if clo == chi and lo != clo:
            return clo
        bits *= 2
        if bits > 1 << 16:
            raise AssertionError("root interval failed to converge")


# -- predictions --


@dataclass(frozen=True)
class TheoryPrediction:
    """One comparable quantity: an exact count, an upper bound, or a
    report-only figure that is never asserted."""

    source: str
    kind: str  # "exact" | "upper_bound" | "report_only"
    value: object  # int, Fraction, or float (report_only)
    strict: bool = False  # upper bound holds with < instead of <=
    note: str = ""
    params: dict = field(default_factory=dict)

    def check(self, observed: int):
        """(passed, slack) against an observed class count."""
        if self.kind == "exact":
            return observed == self.value, self.value - observed
        if self.kind == "upper_bound":
            slack = self.value - observed
            return (slack > 0 if self.strict else slack >= 0), slack
        return True, None

    def to_json(self) -> dict:
        value = self.value
        if isinstance(value, Fraction):
            value = str(value)
        return {
            "source": self.source,
            "kind": self.kind,
            "value": value,
            "strict": self.strict,
            "note": self.note,
            "params": {k: str(v) for k, v in self.params.items()},
        }


def degree_family_bound(q: int, d: int) -> TheoryPrediction:
    """Upper bound for classes of all degree-d polynomial maps over F_q.

    q^(d-1) + (s-1) q^(d-1-phi(d-1)) with s = gcd(q-1, d-1), plus an
    extra (q-1) q^(d/p-1) term when the characteristic divides d.
    """
    if d < 2:
        raise InvalidParametersError("degree bound needs d >= 2")
    p, _ = characteristic_of(q)
    s = math.gcd(q - 1, d - 1)
    value = q ** (d - 1)
    if s > 1:
        value += (s - 1) * q ** (d - 1 - euler_phi(d - 1))
    if d % p == 0:
        value += (q - 1) * q ** (d // p - 1)
    return TheoryPrediction(
        source="degree-affine-orbit-bound",
        kind="upper_bound",
        value=value,
        params={"q": q, "d": d, "s": s},
    )


def degree_family_bound_simple(q: int, d: int) -> TheoryPrediction:
    """The uniform 3 q^(d-1) relaxation of degree_family_bound."""
    return TheoryPrediction(
        source="degree-bound-3x",
        kind="upper_bound",
        value=3 * q ** (d - 1),
        params={"q": q, "d": d},
    )


def lower_growth_exponent(d: int, e: int):
    """Report-only growth exponent 1 / (2 (e - 1 + log d / log e)).

    Returned as a Fraction when d is an exact power of e, else a float.
    Never asserted against a census: the additive o(1) in the exponent is
    unquantified.
    """
    if d < 2 or e < 2:
        raise InvalidParametersError("growth exponent needs d >= 2 and e >= 2")
    j, power = 0, 1
    while power < d:
        j += 1
        power *= e
    if power == d:
        value = Fraction(1, 2 * (e - 1 + j))
    else:
        value = 1.0 / (2 * (e - 1 + math.log(d) / math.log(e)))
    return TheoryPrediction(
        source="power-growth-exponent",
        kind="report_only",
        value=value,
        params={"d": d, "e": e},
    )


def sparse_scaling_bound(q: int, exponents) -> TheoryPrediction:
    """(q-1)^(s-1) gcd(e_1 - 1, ..., e_s - 1, q - 1): the number of orbits
    of coefficient vectors under conjugation by x -> lambda x."""
    exps = tuple(exponents)
    if len(set(exps)) != len(exps) or any(e < 0 for e in exps):
        raise InvalidParametersError(f"bad exponent set {exps}")
    g = math.gcd(q - 1, *(e - 1 for e in exps))
    value = (q - 1) ** (len(exps) - 1) * g
    return TheoryPrediction(
        source="scaling-orbit-bound",
        kind="upper_bound",
        value=value,
        params={"q": q, "exponents": exps},
    )


def sparse_frobenius_bound(p: int, k: int, s: int) -> TheoryPrediction:
    """Ceiling of (q-1)^s/k + 2 (sqrt(q)-1)^s/k + (cbrt(q)-1)^s.

    Bounds the cycles of x -> x^p acting on nonzero coefficient vectors;
    independent of the exponent set.
    """
    q = p**k

    def value_at(bits):
        s2lo, s2hi = _root_interval(q, 2, bits)
        s3lo, s3hi = _root_interval(q, 3, bits)
        base = Fraction((q - 1) ** s, k)
        lo = base + 2 * (s2lo - 1) ** s / k + (s3lo - 1) ** s
        hi = base + 2 * (s2hi - 1) ** s / k + (s3hi - 1) ** s
        return lo, hi

    return TheoryPrediction(
        source="frobenius-cycle-bound",
        kind="upper_bound",
        value=_ceil_of_interval(value_at),
        note="ceiling of an irrational expression",
        params={"p": p, "k": k, "s": s},
    )


def sparse_subfield_bound(p: int, k: int, s: int) -> TheoryPrediction:
    """Exact rational refinement of the Frobenius-cycle count:
    sum over e | k of mu(e)/e * sum over d | k/e of (p^d - 1)^s / d."""
    value = Fraction(0)
    for e in divisors(k):
        mu = mobius(e)
        if mu == 0:
            continue
        inner = sum(Fraction((p**d - 1) ** s, d) for d in divisors(k // e))
        value += Fraction(mu, e) * inner
    return TheoryPrediction(
        source="subfield-moebius-bound",
        kind="upper_bound",
        value=value,
        params={"p": p, "k": k, "s": s},
    )


def linearised_bound(p: int, k: int, n: int) -> TheoryPrediction:
    """Strict bound (2p-2) q^(n-1) + 2 q^(n-phi(n)) for p-linearised maps
    of degree p^n."""
    if n < 1:
        raise InvalidParametersError("linearised bound needs n >= 1")
    q = p**k
    value = (2 * p - 2) * q ** (n - 1) + 2 * q ** (n - euler_phi(n))
    return TheoryPrediction(
        source="linearised-affine-orbit-bound",
        kind="upper_bound",
        value=value,
        strict=True,
        params={"p": p, "k": k, "n": n},
    )


def linearised_bound_weak(p: int, k: int, n: int) -> TheoryPrediction:
    return TheoryPrediction(
        source="linearised-bound-weak",
        kind="upper_bound",
        value=2 * p * (p**k) ** (n - 1),
        strict=True,
        params={"p": p, "k": k, "n": n},
    )


def linear_class_count(q: int) -> TheoryPrediction:
    """Exact count for a X + b maps: tau(q-1) + 1."""
    if q < 2:
        raise InvalidParametersError("need q >= 2")
    return TheoryPrediction(
        source="linear-exact",
        kind="exact",
        value=divisor_count(q - 1) + 1,
        params={"q": q},
    )


def power_class_count(q: int, d: int) -> TheoryPrediction:
    """Exact count for a X^d maps: tau(gcd(d-1, q-1))."""
    if d < 1:
        raise InvalidParametersError("need d >= 1")
    g = math.gcd(d - 1, q - 1)  # d = 1 gives gcd(0, q-1) = q-1
    return TheoryPrediction(
        source="power-exact",
        kind="exact",
        value=divisor_count(g),
        params={"q": q, "d": d},
    )


def frobenius_affine_class_count(p: int, k: int, norm_filter: str = "any") -> TheoryPrediction:
    """Exact count for a X^p + b maps, optionally filtered by norm(a).

    norm1 -> 2 (one class with p fixed points, one with none);
    any -> tau(p-1) + 1; normne1 -> tau(p-1) - 1 (one fixed point each).
    """
    if not is_prime(p):
        raise InvalidParametersError(f"{p} is not prime")
    if norm_filter == "norm1":
        value = 2
    elif norm_filter == "any":
        value = divisor_count(p - 1) + 1
    elif norm_filter == "normne1":
        value = divisor_count(p - 1) - 1
    else:
        raise InvalidParametersError(f"unknown norm filter {norm_filter!r}")
    return TheoryPrediction(
        source=f"frobenius-affine-exact-{norm_filter}",
        kind="exact",
        value=value,
        params={"p": p, "k": k, "norm_filter": norm_filter},
    )


def _euclid_split(m: int, gap: int) -> tuple[int, int, int]:
    """t, r, r* from m = t*gap + r; r* counts 1 <= i <= r not coprime to gap."""
    t, r = divmod(m, gap)
    r_star = sum(1 for i in range(1, r + 1) if math.gcd(i, gap) != 1) if r else 0
    return t, r, r_star


def rational_scaling_bound(q: int, m: int, n: int) -> TheoryPrediction:
    """Scaling-orbit bound for degree-(m, n) rational maps.

    Undefined when m = n + 1 (the fixed-coefficient recursion divides by
    lambda^(m-n-1) - 1, which is identically zero); callers fall back to
    the trivial bound and flag the family.
    """
    if m < 0 or n < 0 or m + n < 1:
        raise InvalidParametersError(f"bad rational degrees ({m}, {n})")
    gap = abs(m - n - 1)
    if gap == 0:
        raise DivisionUndefinedError(f"(m, n) = ({m}, {n}) degenerate for the scaling bound")
    s = math.gcd(q - 1, gap)
    if m >= 1:
        t, _, r_star = _euclid_split(m, gap)
        value = q ** (m + n) + (s - 1) * q ** (n + t * (gap - euler_phi(gap)) + r_star)
    elif n == 1:
        value = q + s - 1
    else:
        value = q**n + (s - 1) * q ** (n - 2)
    return TheoryPrediction(
        source="rational-scaling-bound",
        kind="upper_bound",
        value=value,
        params={"q": q, "m": m, "n": n, "s": s},
    )


def rational_affine_bound(q: int, m: int, n: int) -> TheoryPrediction:
    """Affine-orbit bound for rational maps with m - n >= 2.

    q^(m+n-1) + (s-1) q^(n + t(gap - phi(gap)) + r*) with gap = m - n - 1,
    plus (q-1) q^(floor(m/p) - 1) when the characteristic divides m - n.
    At n = 0 this coincides with degree_family_bound.
    """
    if m - n < 2:
        raise InvalidParametersError("affine rational bound needs m - n >= 2")
    p, _ = characteristic_of(q)
    gap = m - n - 1
    s = math.gcd(q - 1, gap)
    t, _, r_star = _euclid_split(m, gap)
    value = q ** (m + n - 1)
    if s > 1:
        value += (s - 1) * q ** (n + t * (gap - euler_phi(gap)) + r_star)
    if (m - n) % p == 0:
        value += (q - 1) * q ** (m // p - 1)
    return TheoryPrediction(
        source="rational-affine-orbit-bound",
        kind="upper_bound",
        value=value,
        params={"q": q, "m": m, "n": n, "s": s},
    )


def trivial_bound_for(kind: str, q: int, **params) -> TheoryPrediction:
    """Counting bound: never more classes than family members (strict for
    rational maps, where q^(m+n+1) > (q-1) q^(m+n))."""
    if kind in ("all-degree-d", "linear"):
        d = params.get("d", 1)
        value, strict = (q - 1) * q**d, False
    elif kind == "power":
        value, strict = q - 1, False
    elif kind == "sparse":
        value, strict = (q - 1) ** len(params["exponents"]), False
    elif kind == "linearised":
        value, strict = q ** (params["n"] + 1), True
    elif kind == "frobenius-affine":
        value, strict = (q - 1) * q, False
    elif kind == "rational":
        value, strict = q ** (params["m"] + params["n"] + 1), True
    else:
        raise InvalidParametersError(f"unknown family kind {kind!r}")
    return TheoryPrediction(
        source="trivial-count-bound", kind="upper_bound", value=value, strict=strict
    )


# -- binding predictions to census reports --


@dataclass(frozen=True)
class VerificationResult:
    family: dict
    observed: int
    checks: tuple  # of (TheoryPrediction, passed, slack)
    overall: bool

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "observed": self.observed,
            "overall": self.overall,
            "checks": [
                {
                    **pred.to_json(),
                    "pass": passed,
                    "slack": str(slack) if slack is not None else None,
                }
                for pred, passed, slack in self.checks
            ],
        }


def predictions_for_family(kind: str, q: int, p: int, k: int, **params) -> list[TheoryPrediction]:
    """Every applicable prediction for one family, exact formulas first."""
    preds: list[TheoryPrediction] = []
    if kind == "linear":
        preds.append(linear_class_count(q))
    elif kind == "power":
        preds.append(power_class_count(q, params["d"]))
    elif kind == "frobenius-affine":
        preds.append(frobenius_affine_class_count(p, k, params.get("norm_filter", "any")))
    elif kind == "all-degree-d":
        d = params["d"]
        preds.append(degree_family_bound(q, d))
        preds.append(degree_family_bound_simple(q, d))
        e = math.gcd(d, q - 1)
        if e >= 2 and math.gcd(d - 1, q) == 1:
            # lower-bound growth exponent; informational only, the
            # additive error term is unquantified at any finite q
            preds.append(lower_growth_exponent(d, e))
    elif kind == "sparse":
        exps = tuple(params["exponents"])
        preds.append(sparse_scaling_bound(q, exps))
        preds.append(sparse_frobenius_bound(p, k, len(exps)))
        preds.append(sparse_subfield_bound(p, k, len(exps)))
    elif kind == "linearised":
        preds.append(linearised_bound(p, k, params["n"]))
        preds.append(linearised_bound_weak(p, k, params["n"]))
    elif kind == "rational":
        m, n = params["m"], params["n"]
        try:
            preds.append(rational_scaling_bound(q, m, n))
        except DivisionUndefinedError:
            preds.append(
                TheoryPrediction(
                    source="rational-scaling-bound",
                    kind="report_only",
                    value=None,
                    note="degenerate: numerator degree exceeds denominator degree by one;"
                    " only the trivial bound applies",
                    params={"q": q, "m": m, "n": n},
                )
            )
        if m - n >= 2:
            preds.append(rational_affine_bound(q, m, n))
    else:
        raise InvalidParametersError(f"unknown family kind {kind!r}")
    preds.append(trivial_bound_for(kind, q, **params))
    return preds


def verify_report(report) -> VerificationResult:
    """Attach every applicable prediction to a census report and compare."""
    spec = report.family
    f = spec.field
    params = {}
    if spec.kind in ("all-degree-d", "power"):
        params["d"] = spec.d
    if spec.kind == "sparse":
        params["exponents"] = spec.exps
    if spec.kind == "linearised":
        params["n"] = spec.n
    if spec.kind == "frobenius-affine":
        params["norm_filter"] = spec.norm_filter
    if spec.kind == "rational":
        params["m"], params["n"] = spec.m, spec.n
    preds = predictions_for_family(spec.kind, f.q, f.p, f.k, **params)
    observed = report.distinct_classes
    checks = tuple((pred, *pred.check(observed)) for pred in preds)
    overall = all(passed for _, passed, _ in checks)
    return VerificationResult(
        family=spec.to_json(), observed=observed, checks=checks, overall=overall
    )
