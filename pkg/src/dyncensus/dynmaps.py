"""Polynomial and rational self-maps of F_q, their families, and the
symmetries that preserve their functional graphs.

A map family is a declarative FamilySpec; every family is indexable, so
member i can be materialized directly without enumerating its
predecessors.  The index order is the integer order of the coefficient
encoding (constant coefficient least significant), which fixes the
enumeration, makes streams resumable, and lets orbit reductions pick the
minimal-encoding member as the canonical representative.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

from .gfq import FieldSpec, FieldMismatchError


class InvalidSpecError(ValueError):
    pass


class ZeroLambdaError(ValueError):
    pass


class ModelMismatchError(ValueError):
    pass


class DegreeDropError(ValueError):
    """Affine conjugation pushed a rational map out of its degree family."""


# -- polynomial coefficient helpers (tuples over a FieldSpec) --


def poly_trim(coeffs) -> tuple[int, ...]:
    cs = list(coeffs)
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


def poly_add(field: FieldSpec, a, b) -> tuple[int, ...]:
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else 0
        y = b[i] if i < len(b) else 0
        out.append(field.add(x, y))
    return poly_trim(out)

def poly_scale(field: FieldSpec, c: int, a) -> tuple[int, ...]:
    return poly_trim(field.mul(c, x) for x in a)


def poly_mul(field: FieldSpec, a, b) -> tuple[int, ...]:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = field.add(out[i + j], field.mul(x, y))
    return poly_trim(out)


def poly_divmod(field: FieldSpec, a, b):
    b = poly_trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(a)
    quo = [0] * max(len(a) - len(b) + 1, 1)
    inv_lead = field.inv(b[-1])
    while len(rem) >= len(b) and poly_trim(rem):
        rem = list(poly_trim(rem))
        if len(rem) < len(b):
            break
        coef = field.mul(rem[-1], inv_lead)
        shift = len(rem) - len(b)
        quo[shift] = coef
        for i, y in enumerate(b):
            rem[shift + i] = field.sub(rem[shift + i], field.mul(coef, y))
    return poly_trim(quo), poly_trim(rem)


def poly_gcd(field: FieldSpec, a, b) -> tuple[int, ...]:
    """Monic gcd by the Euclidean algorithm."""
    a, b = poly_trim(a), poly_trim(b)
    while b:
        _, r = poly_divmod(field, a, b)
        a, b = b, r
    if a:
        a = poly_scale(field, field.inv(a[-1]), a)
    return a


def poly_compose_affine(field: FieldSpec, coeffs, lam: int, mu: int) -> tuple[int, ...]:
    """Coefficients of f(lam*X + mu), by Horner over polynomials."""
    acc: tuple[int, ...] = ()
    inner = poly_trim((mu, lam))
    for c in reversed(coeffs):
        acc = poly_mul(field, acc, inner)
        acc = poly_add(field, acc, (c,))
    return acc


def poly_eval(field: FieldSpec, coeffs, x: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = field.add(field.mul(acc, x), c)
    return acc


# -- maps --


class PolyMap:
    """A polynomial self-map of F_q, dense or sparse.

    Sparse maps remember their (exponent, coefficient) terms and evaluate
    by exponent-wise powering; dense maps evaluate by Horner.  The two
    representations agree pointwise, which the tests cross-check.
    """

    __slots__ = ("field", "coeffs", "terms")

    def __init__(self, field: FieldSpec, coeffs, terms=None):
        self.field = field
        self.coeffs = poly_trim(coeffs)
        self.terms = terms

    @classmethod
    def dense(cls, field: FieldSpec, coeffs) -> "PolyMap":
        return cls(field, coeffs)

    @classmethod
    def sparse(cls, field: FieldSpec, terms) -> "PolyMap":
        """terms: iterable of (exponent, coefficient), coefficients nonzero."""
        terms = tuple(sorted((int(e), c) for e, c in terms))
        exps = [e for e, _ in terms]
        if len(set(exps)) != len(exps):
            raise InvalidSpecError("sparse exponents must be distinct")
        if any(c == 0 for _, c in terms):
            raise InvalidSpecError("sparse coefficients must be nonzero")
        coeffs = [0] * (max(exps) + 1 if exps else 0)
        for e, c in terms:
            coeffs[e] = c
        return cls(field, coeffs, terms)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if self.coeffs else -1

    @property
    def domain_size(self) -> int:
        return self.field.q

    def eval(self, x: int) -> int:
        field = self.field
        if not 0 <= x < field.q:
            raise FieldMismatchError(f"{x} not in F_{field.q}")
        if self.terms is not None:
            acc = 0
            for e, c in self.terms:
                acc = field.add(acc, field.mul(c, field.pow(x, e)))
            return acc
        return poly_eval(field, self.coeffs, x)

    def conjugate(self, lam: int, mu: int = 0) -> "PolyMap":
        """The map phi^-1 . f . phi for phi(X) = lam*X + mu, on coefficients."""
        if lam == 0:
            raise ZeroLambdaError("conjugation needs lam != 0")
        field = self.field
        composed = poly_compose_affine(field, self.coeffs, lam, mu)
        shifted = poly_add(field, composed, (field.neg(mu),))
        return PolyMap(field, poly_scale(field, field.inv(lam), shifted))

    def frobenius_twist(self, i: int) -> "PolyMap":
        """Apply x -> x^(p^i) to every coefficient; exponents unchanged."""
        field = self.field
        if self.terms is not None:
            return PolyMap.sparse(field, ((e, field.frobenius(c, i)) for e, c in self.terms))
        return PolyMap(field, tuple(field.frobenius(c, i) for c in self.coeffs))

    def is_permutation(self) -> bool:
        seen = [False] * self.field.q
        for x in range(self.field.q):
            y = self.eval(x)
            if seen[y]:
                return False
            seen[y] = True
        return True

    def encoding(self) -> int:
        """Integer encoding of the coefficient vector, constant term least
        significant; the total order used for orbit representatives."""
        enc = 0
        for c in reversed(self.coeffs):
            enc = enc * self.field.q + c
        return enc

    def __eq__(self, other):
        return (
            isinstance(other, PolyMap)
            and self.field == other.field
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.field, self.coeffs))

    def __repr__(self):
        return f"PolyMap({self.coeffs} over F_{self.field.q})"

    def to_json(self) -> dict:
        out = {"kind": "poly", "field": self.field.to_json(), "coeffs": list(self.coeffs)}
        if self.terms is not None:
            out["terms"] = [list(t) for t in self.terms]
        return out


class RationalMap:
    """A quotient f/g acting on F_q (affine model) or on F_q + {infinity}
    (projective model).

    Affine model: x maps to f(x)/g(x) where g(x) != 0 and to the fixed
    field element alpha otherwise; f and g are used exactly as given.
    Projective model: common factors of f and g are cleared once at
    construction, remaining zeros of g map to infinity, and infinity maps
    by the degree comparison of the reduced pair.
    """

    __slots__ = ("field", "numer", "denom", "alpha", "model", "_reduced")

    def __init__(self, field: FieldSpec, numer: PolyMap, denom: PolyMap,
                 alpha: int = 0, model: str = "affine"):
        if model not in ("affine", "projective"):
            raise InvalidSpecError(f"unknown model {model!r}")
        if not denom.coeffs or denom.coeffs[-1] != 1:
            raise InvalidSpecError("denominator must be monic")
        if not numer.coeffs:
            raise InvalidSpecError("numerator must be nonzero")
        self.field = field
        self.numer = numer
        self.denom = denom
        self.alpha = alpha
        self.model = model
        if model == "projective":
            g = poly_gcd(field, numer.coeffs, denom.coeffs)
            fr, _ = poly_divmod(field, numer.coeffs, g)
            gr, _ = poly_divmod(field, denom.coeffs, g)
            self._reduced = (fr, gr)
        else:
            self._reduced = None

    @property
    def degrees(self) -> tuple[int, int]:
        return self.numer.degree, self.denom.degree

    @property
    def domain_size(self) -> int:
        return self.field.q + (1 if self.model == "projective" else 0)

    @property
    def infinity(self) -> int:
        if self.model != "projective":
            raise ModelMismatchError("affine model has no infinity vertex")
        return self.field.q

    def eval(self, x: int) -> int:
        field = self.field
        q = field.q
        if self.model == "affine":
            if not 0 <= x < q:
                raise ModelMismatchError(f"{x} not in the affine domain of size {q}")
            gx = self.denom.eval(x)
            if gx == 0:
                return self.alpha
            return field.div(self.numer.eval(x), gx)
        if not 0 <= x <= q:
            raise ModelMismatchError(f"{x} not in the projective domain of size {q + 1}")
        fr, gr = self._reduced
        m, n = self.numer.degree, self.denom.degree
        if x == q:
            if m > n:
                return q
            if m == n:
                return fr[-1]  # ratio of leading coefficients; g is monic
            return 0
        gx = poly_eval(field, gr, x)
        if gx == 0:
            return q
        return field.div(poly_eval(field, fr, x), gx)

    def conjugate(self, lam: int, mu: int = 0) -> "RationalMap":
        """phi^-1 . (f/g) . phi, renormalized so the denominator stays monic.

        Raises DegreeDropError if the result leaves the (m, n) family,
        which can happen for mu != 0 when m <= n.
        """
        if lam == 0:
            raise ZeroLambdaError("conjugation needs lam != 0")
        field = self.field
        m, n = self.numer.degree, self.denom.degree
        f_phi = poly_compose_affine(field, self.numer.coeffs, lam, mu)
        g_phi = poly_compose_affine(field, self.denom.coeffs, lam, mu)
        # phi^-1(f(phi)/g(phi)) = (f(phi) - mu g(phi)) / (lam g(phi))
        new_f = poly_add(field, f_phi, poly_scale(field, field.neg(mu), g_phi))
        new_g = poly_scale(field, lam, g_phi)
        if len(new_f) - 1 != m or len(new_g) - 1 != n:
            raise DegreeDropError(
                f"conjugate of degrees ({m}, {n}) by (lam={lam}, mu={mu}) degenerated"
            )
        lead = new_g[-1]
        if lead != 1:
            inv = field.inv(lead)
            new_f = poly_scale(field, inv, new_f)
            new_g = poly_scale(field, inv, new_g)
        new_alpha = field.mul(field.inv(lam), field.sub(self.alpha, mu))
        return RationalMap(field, PolyMap(field, new_f), PolyMap(field, new_g),
                           alpha=new_alpha, model=self.model)

    def is_permutation(self) -> bool:
        size = self.domain_size
        seen = [False] * size
        for x in range(size):
            y = self.eval(x)
            if seen[y]:
                return False
            seen[y] = True
        return True

    def encoding(self) -> int:
        """Numerator digits above denominator digits, constant terms least
        significant within each block."""
        q = self.field.q
        enc = 0
        for c in reversed(self.numer.coeffs):
            enc = enc * q + c
        for c in reversed(self.denom.coeffs[:-1]):
            enc = enc * q + c
        return enc

    def __eq__(self, other):
        return (
            isinstance(other, RationalMap)
            and self.field == other.field
            and self.numer.coeffs == other.numer.coeffs
            and self.denom.coeffs == other.denom.coeffs
            and self.alpha == other.alpha
            and self.model == other.model
        )

    def __hash__(self):
        return hash((self.field, self.numer.coeffs, self.denom.coeffs, self.alpha, self.model))

    def __repr__(self):
        return (f"RationalMap({self.numer.coeffs}/{self.denom.coeffs},"
                f" alpha={self.alpha}, model={self.model} over F_{self.field.q})")

    def to_json(self) -> dict:
        return {
            "kind": "rational",
            "field": self.field.to_json(),
            "coeffs": list(self.numer.coeffs),
            "denom": list(self.denom.coeffs),
            "alpha": self.alpha,
            "model": self.model,
        }


# -- families --

FAMILY_KINDS = (
    "all-degree-d",
    "sparse",
    "linearised",
    "linear",
    "power",
    "frobenius-affine",
    "rational",
)


@dataclass(frozen=True)
class FamilySpec:
    """Declarative description of one enumerable family of maps."""

    kind: str
    field: FieldSpec
    d: int | None = None
    exps: tuple[int, ...] | None = None
    n: int | None = None
    m: int | None = None
    alpha: int = 0
    model: str = "affine"
    norm_filter: str = "any"

    def __post_init__(self):
        f = self.field
        if self.kind in ("all-degree-d", "power"):
            if self.d is None or self.d < 1:
                raise InvalidSpecError(f"{self.kind} needs d >= 1")
        elif self.kind == "sparse":
            if not self.exps or len(set(self.exps)) != len(self.exps) or min(self.exps) < 0:
                raise InvalidSpecError("sparse needs distinct exponents >= 0")
            object.__setattr__(self, "exps", tuple(sorted(self.exps)))
        elif self.kind == "linearised":
            if self.n is None or self.n < 1:
                raise InvalidSpecError("linearised needs n >= 1")
        elif self.kind == "linear":
            pass
        elif self.kind == "frobenius-affine":
            if self.norm_filter not in ("any", "norm1", "normne1"):
                raise InvalidSpecError(f"unknown norm filter {self.norm_filter!r}")
        elif self.kind == "rational":
            if self.m is None or self.n is None or self.m < 0 or self.n < 0 or self.m + self.n < 1:
                raise InvalidSpecError("rational needs m, n >= 0 with m + n >= 1")
            if self.model not in ("affine", "projective"):
                raise InvalidSpecError(f"unknown model {self.model!r}")
            if not 0 <= self.alpha < f.q:
                raise InvalidSpecError(f"alpha {self.alpha} outside F_{f.q}")
        else:
            raise InvalidSpecError(f"unknown family kind {self.kind!r}")

    @cached_property
    def _norm_allowed(self) -> tuple[int, ...]:
        f = self.field
        if self.norm_filter == "any":
            return tuple(range(1, f.q))
        want_one = self.norm_filter == "norm1"
        return tuple(a for a in range(1, f.q) if (f.norm(a) == 1) == want_one)

    @property
    def domain_size(self) -> int:
        return self.field.q + (1 if self.kind == "rational" and self.model == "projective" else 0)

    def size(self) -> int:
        q = self.field.q
        if self.kind == "all-degree-d":
            return (q - 1) * q**self.d
        if self.kind == "sparse":
            return (q - 1) ** len(self.exps)
        if self.kind == "linearised":
            return (q - 1) * q**self.n
        if self.kind == "linear":
            return (q - 1) * q
        if self.kind == "power":
            return q - 1
        if self.kind == "frobenius-affine":
            return len(self._norm_allowed) * q
        return (q - 1) * q ** (self.m + self.n)

    def member(self, i: int):
        """The i-th map, in increasing coefficient-encoding order."""
        q = self.field.q
        f = self.field
        if not 0 <= i < self.size():
            raise IndexError(f"family index {i} out of range")
        if self.kind in ("all-degree-d", "linear"):
            d = self.d if self.kind == "all-degree-d" else 1
            lead = 1 + i // q**d
            rest = i % q**d
            coeffs = [(rest // q**j) % q for j in range(d)] + [lead]
            return PolyMap(f, coeffs)
        if self.kind == "sparse":
            radix = q - 1
            coeffs = []
            for _ in self.exps:
                coeffs.append(1 + i % radix)
                i //= radix
            return PolyMap.sparse(f, zip(self.exps, coeffs))
        if self.kind == "linearised":
            lead = 1 + i // q**self.n
            rest = i % q**self.n
            terms = [(f.p**j, (rest // q**j) % q) for j in range(self.n)]
            terms = [(e, c) for e, c in terms if c != 0]
            terms.append((f.p**self.n, lead))
            return PolyMap.sparse(f, terms)
        if self.kind == "power":
            return PolyMap.sparse(f, [(self.d, 1 + i)])
        if self.kind == "frobenius-affine":
            a = self._norm_allowed[i // q]
            b = i % q
            terms = [(f.p, a)] if b == 0 else [(0, b), (f.p, a)]
            return PolyMap.sparse(f, terms)
        # rational: numerator digits above denominator digits
        denom_idx = i % q**self.n
        numer_idx = i // q**self.n
        b = [(denom_idx // q**j) % q for j in range(self.n)] + [1]
        lead = 1 + numer_idx // q**self.m
        rest = numer_idx % q**self.m
        a = [(rest // q**j) % q for j in range(self.m)] + [lead]
        return RationalMap(f, PolyMap(f, a), PolyMap(f, b), alpha=self.alpha, model=self.model)

    def members(self):
        """Every member exactly once, in index order."""
        return (self.member(i) for i in range(self.size()))

    def index_of(self, mp) -> int:
        """Inverse of member(); raises if the map is not in the family."""
        q = self.field.q
        if self.kind in ("all-degree-d", "linear"):
            d = self.d if self.kind == "all-degree-d" else 1
            if not isinstance(mp, PolyMap) or mp.degree != d:
                raise InvalidSpecError("map not in family")
            coeffs = mp.coeffs
            i = (coeffs[d] - 1) * q**d
            return i + sum(coeffs[j] * q**j for j in range(d))
        if self.kind == "sparse":
            if not isinstance(mp, PolyMap):
                raise InvalidSpecError("map not in family")
            terms = dict(mp.terms if mp.terms is not None else enumerate(mp.coeffs))
            terms = {e: c for e, c in terms.items() if c}
            if set(terms) != set(self.exps):
                raise InvalidSpecError("map not in family")
            i = 0
            for e in reversed(self.exps):
                i = i * (q - 1) + (terms[e] - 1)
            return i
        if self.kind == "linearised":
            coeffs = {e: c for e, c in enumerate(mp.coeffs) if c}
            allowed = {self.field.p**j for j in range(self.n + 1)}
            if not set(coeffs) <= allowed or self.field.p**self.n not in coeffs:
                raise InvalidSpecError("map not in family")
            i = (coeffs[self.field.p**self.n] - 1) * q**self.n
            return i + sum(coeffs.get(self.field.p**j, 0) * q**j for j in range(self.n))
        if self.kind == "power":
            terms = {e: c for e, c in enumerate(mp.coeffs) if c}
            if set(terms) != {self.d}:
                raise InvalidSpecError("map not in family")
            return terms[self.d] - 1
        if self.kind == "frobenius-affine":
            coeffs = {e: c for e, c in enumerate(mp.coeffs) if c}
            a = coeffs.get(self.field.p)
            b = coeffs.get(0, 0)
            if a is None or not set(coeffs) <= {0, self.field.p}:
                raise InvalidSpecError("map not in family")
            try:
                a_idx = self._norm_allowed.index(a)
            except ValueError:
                raise InvalidSpecError("map not in family") from None
            return a_idx * q + b
        if not isinstance(mp, RationalMap) or mp.degrees != (self.m, self.n):
            raise InvalidSpecError("map not in family")
        numer_idx = (mp.numer.coeffs[self.m] - 1) * q**self.m
        numer_idx += sum(mp.numer.coeffs[j] * q**j for j in range(self.m))
        denom_idx = sum(mp.denom.coeffs[j] * q**j for j in range(self.n))
        return numer_idx * q**self.n + denom_idx

    def contains(self, mp) -> bool:
        try:
            self.index_of(mp)
        except (InvalidSpecError, IndexError):
            return False
        if self.kind == "rational":
            return mp.alpha == self.alpha and mp.model == self.model
        return True

    def params_label(self) -> str:
        parts = []
        if self.d is not None:
            parts.append(f"d={self.d}")
        if self.exps is not None:
            parts.append("exps=" + ",".join(map(str, self.exps)))
        if self.n is not None:
            parts.append(f"n={self.n}")
        if self.m is not None:
            parts.append(f"m={self.m}")
        if self.kind == "rational":
            parts.append(f"model={self.model}")
            parts.append(f"alpha={self.alpha}")
        if self.kind == "frobenius-affine":
            parts.append(f"norm={self.norm_filter}")
        return ";".join(parts)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "field": self.field.to_json()}
        if self.d is not None:
            out["d"] = self.d
        if self.exps is not None:
            out["exps"] = list(self.exps)
        if self.n is not None:
            out["n"] = self.n
        if self.m is not None:
            out["m"] = self.m
        if self.kind == "rational":
            out["alpha"] = self.alpha
            out["model"] = self.model
        if self.kind == "frobenius-affine":
            out["norm"] = self.norm_filter
        return out

    def digest(self) -> str:
        import hashlib

        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()
