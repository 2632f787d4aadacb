"""Polynomial phases Z -> R/Z and their constructive partitions.

Coefficients are kept internally as exact rationals: a phase entered
with float coefficients is lifted through the (exact) dyadic value of
each double, so every mod-1 computation in this module is exact
arithmetic; the `exact` flag only records how the phase was entered and
how it serializes.  This removes all rounding anxiety from the
certificate machinery: a diameter witness is the true supremum for the
stored coefficients.

Two coefficient bases are supported: binomial, phi(n) = sum a_j C(n,j),
and monomial, phi(n) = sum t_j n^j, with exact conversion both ways.
The smoothness norm is sup_{1<=j} N^j ||a_j|| over binomial
coefficients.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from .errors import InvalidArgumentError, NoQFoundError, PreconditionError
from .progressions import Progression, subdivide

HALF = Fraction(1, 2)
# strictly below 6/pi^2, so the per-degree budgets sum to < epsilon
BUDGET_WEIGHT = Fraction(6079271018540266, 10**16)


def lift(x):
    """Exact rational representative of a coefficient."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)  # exact dyadic value of the double
    if isinstance(x, str):
        return Fraction(x)
    raise InvalidArgumentError(f"cannot use {x!r} as a phase coefficient")


def frac(x):
    """Representative of x mod 1 in [0, 1)."""
    return x - (x.numerator // x.denominator)


def circ_norm(x):
    """Distance ||x|| from x to the nearest integer, in [0, 1/2]."""
    f = frac(x)
    return f if f <= HALF else 1 - f


def signed_rep(x):
    """Representative of x mod 1 in (-1/2, 1/2]."""
    f = frac(x)
    return f if f <= HALF else f - 1


def circ_dist(x, y):
    return circ_norm(x - y)


def binom_int(n, j):
    """C(n, j) for arbitrary integer n (integer-valued)."""
    if j < 0:
        return 0
    num = 1
    for i in range(j):
        num *= n - i
    den = 1
    for i in range(2, j + 1):
        den *= i
    return num // den if num % den == 0 else Fraction(num, den)  # always exact int


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def monomial_from_binomial(alphas):
    """Monomial coefficients of sum a_j C(n, j)."""
    out = [Fraction(0)] * len(alphas)
    basis = [Fraction(1)]  # C(n,0)
    fact = 1
    for j, a in enumerate(alphas):
        if j > 0:
            basis = _poly_mul(basis, [Fraction(-(j - 1)), Fraction(1)])
            fact *= j
        if a:
            for i, b in enumerate(basis):
                out[i] += a * b / fact
    return out


def binomial_from_monomial(thetas):
    """Binomial coefficients via iterated forward differences at 0."""
    s = len(thetas) - 1
    vals = []
    for n in range(s + 1):
        acc = Fraction(0)
        for t in reversed(thetas):
            acc = acc * n + t
        vals.append(acc)
    alphas = []
    for _ in range(s + 1):
        alphas.append(vals[0])
        vals = [b - a for a, b in zip(vals, vals[1:])]
    return alphas


class PolyPhase:
    """Polynomial phase with exact rational coefficient arithmetic."""

    __slots__ = ("basis", "coeffs", "exact")

    def __init__(self, coeffs, basis="binomial", exact=None):
        if basis not in ("binomial", "monomial"):
            raise InvalidArgumentError(f"unknown basis {basis!r}")
        raw = list(coeffs) or [0]
        if exact is None:
            exact = not any(isinstance(c, float) for c in raw)
        self.basis = basis
        self.coeffs = tuple(lift(c) for c in raw)
        self.exact = exact

    @classmethod
    def monomial(cls, coeffs, exact=None):
        return cls(coeffs, basis="monomial", exact=exact)

    @classmethod
    def binomial(cls, coeffs, exact=None):
        return cls(coeffs, basis="binomial", exact=exact)

    @classmethod
    def constant(cls, c, exact=None):
        return cls([c], basis="binomial", exact=exact)

    @classmethod
    def zero(cls):
        return cls([0])

    # -- basis views ---------------------------------------------------

    def monomial_coeffs(self):
        if self.basis == "monomial":
            return list(self.coeffs)
        return monomial_from_binomial(list(self.coeffs))

    def binomial_coeffs(self):
        if self.basis == "binomial":
            return list(self.coeffs)
        return binomial_from_monomial(list(self.coeffs))

    def in_basis(self, basis):
        if basis == self.basis:
            return self
        coeffs = self.monomial_coeffs() if basis == "monomial" else self.binomial_coeffs()
        return PolyPhase(coeffs, basis=basis, exact=self.exact)

    # -- structure -----------------------------------------------------

    @property
    def declared_degree(self):
        return len(self.coeffs) - 1

    @property
    def degree(self):
        """Largest j whose binomial coefficient is nonzero mod 1, else 0.

        The binomial basis is the right diagnostic: a phase is integer
        valued on Z exactly when all its binomial coefficients are
        integers.
        """
        alphas = self.binomial_coeffs()
        for j in range(len(alphas) - 1, 0, -1):
            if circ_norm(alphas[j]) != 0:
                return j
        return 0

    def eval(self, n):
        """Value of the phase at integer n, reduced to [0, 1)."""
        acc = Fraction(0)
        if self.basis == "monomial":
            for c in reversed(self.coeffs):
                acc = acc * n + c
        else:
            for j, a in enumerate(self.coeffs):
                if a:
                    acc += a * binom_int(n, j)
        return frac(acc)

    def __call__(self, n):
        return self.eval(n)

    def eval_real(self, n):
        """Value at n without mod-1 reduction (exact Fraction).

        Needed when the coefficients describe a real polynomial rather
        than a phase, e.g. Heisenberg coordinates, where the integer
        part feeds the nonabelian fundamental-domain correction.
        """
        acc = Fraction(0)
        if self.basis == "monomial":
            for c in reversed(self.coeffs):
                acc = acc * n + c
        else:
            for j, a in enumerate(self.coeffs):
                if a:
                    acc += a * binom_int(n, j)
        return acc

    # -- arithmetic ----------------------------------------------------

    def scale(self, q):
        return PolyPhase([q * c for c in self.coeffs], self.basis, self.exact)

    def _binop(self, other, op):
        a = self.monomial_coeffs()
        b = other.monomial_coeffs()
        n = max(len(a), len(b))
        a += [Fraction(0)] * (n - len(a))
        b += [Fraction(0)] * (n - len(b))
        out = [op(x, y) for x, y in zip(a, b)]
        res = PolyPhase(out, basis="monomial", exact=self.exact and other.exact)
        return res.in_basis(self.basis)

    def __add__(self, other):
        return self._binop(other, lambda x, y: x + y)

    def __sub__(self, other):
        return self._binop(other, lambda x, y: x - y)

    def compose_affine_frac(self, a, b):
        """Phase m -> self(a*m + b) for rational a, b (exact)."""
        a, b = lift(a), lift(b)
        thetas = self.monomial_coeffs()
        res = [Fraction(0)]
        for t in reversed(thetas):
            nxt = [Fraction(0)] * (len(res) + 1)
            for i, r in enumerate(res):
                nxt[i] += r * b
                nxt[i + 1] += r * a
            nxt[0] += t
            res = nxt
        res = res[: len(thetas)] + [Fraction(0)] * max(0, len(thetas) - len(res))
        out = PolyPhase(res[: len(thetas)], basis="monomial", exact=self.exact)
        return out.in_basis(self.basis)

    # -- serialization -------------------------------------------------

    def to_json(self):
        if self.exact:
            cs = [f"{c.numerator}/{c.denominator}" for c in self.coeffs]
        else:
            cs = [repr(float(c)) for c in self.coeffs]
        return {"basis": self.basis, "coeffs": cs, "exact": self.exact}

    @classmethod
    def from_json(cls, obj):
        exact = bool(obj.get("exact", True))
        coeffs = [Fraction(c) if exact else float(c) for c in obj["coeffs"]]
        return cls(coeffs, basis=obj["basis"], exact=exact)

    def __repr__(self):
        cs = ", ".join(str(c) if self.exact else repr(float(c)) for c in self.coeffs)
        return f"PolyPhase({self.basis}; {cs})"


def compose_affine(phi, a, b):
    """Phase psi with psi(m) = phi(a*m + b), a and b integers."""
    if not isinstance(a, int) or not isinstance(b, int):
        raise InvalidArgumentError("compose_affine takes integer a, b")
    return phi.compose_affine_frac(a, b)


# ---------------------------------------------------------------------
# Diameter on the circle


def circle_diam(values):
    """Exact supremum of pairwise circle distances of residues in [0,1).

    Sorted antipode scan: for each point the farthest candidate is the
    neighbour of its antipode in circular order, so the scan is
    O(L log L) and exact.
    """
    vals = sorted(set(values))
    n = len(vals)
    if n < 2:
        return Fraction(0)
    ext = vals + [v + 1 for v in vals]
    best = Fraction(0)
    import bisect

    for v in vals:
        target = v + HALF
        j = bisect.bisect_left(ext, target)
        for k in (j - 1, j):
            if 0 <= k < 2 * n:
                d = circ_norm(ext[k] - v)
                if d > best:
                    best = d
    return best


def diam_on(phi, P):
    """Exhaustive diameter of the phase over the elements of P."""
    if P.len < 1:
        raise InvalidArgumentError("progression must be nonempty")
    d = circle_diam([phi.eval(n) for n in P.elements()])
    return d if phi.exact else float(d)


# ---------------------------------------------------------------------
# Weyl minimisation


@dataclass(frozen=True)
class WeylWitness:
    n: int
    value: object  # Fraction or float, = ||alpha * n^s||
    search_bound: int


def weyl_min(alpha, s, N):
    """Exhaustive minimiser of ||alpha n^s|| over 1 <= n <= floor(sqrt(N)).

    Ties go to the smallest n.
    """
    if s < 1:
        raise InvalidArgumentError("s must be a positive integer")
    if N < 1:
        raise InvalidArgumentError("N must be positive")
    a = lift(alpha)
    bound = max(1, isqrt(N))
    best_n, best_v = 1, circ_norm(a)
    for n in range(2, bound + 1):
        v = circ_norm(a * n**s)
        if v < best_v:
            best_n, best_v = n, v
    value = best_v if isinstance(alpha, (Fraction, int)) else float(best_v)
    return WeylWitness(n=best_n, value=value, search_bound=bound)


# ---------------------------------------------------------------------
# Smoothness norm and almost-rationality


def smoothness_norm(phi, N):
    """sup over 1 <= j of N^j ||a_j|| in the binomial basis."""
    if N < 1:
        raise InvalidArgumentError("N must be positive")
    alphas = phi.binomial_coeffs()
    best = Fraction(0)
    for j in range(1, len(alphas)):
        v = N**j * circ_norm(alphas[j])
        if v > best:
            best = v
    return best if phi.exact else float(best)


def rationalize_phase(phi, N, Qmax, ceiling=None):
    """Smallest q <= Qmax minimising the smoothness norm of q*phi on [N].

    Requires diam_{[1..N]}(phi) <= 1/10 (the almost-constancy that makes
    near-rational coefficients possible at all).  If `ceiling` is given
    and even the best q exceeds it, reports no-q-found.
    """
    if Qmax < 1:
        raise InvalidArgumentError("Qmax must be positive")
    d = diam_on(phi, Progression(1, 1, N))
    if d > Fraction(1, 10):
        raise PreconditionError(f"diam over [1..{N}] is {float(d):.6f} > 1/10")
    best_q, best_norm = 1, smoothness_norm(phi, N)
    for q in range(2, Qmax + 1):
        v = smoothness_norm(phi.scale(q), N)
        if v < best_norm:
            best_q, best_norm = q, v
    if ceiling is not None and best_norm > lift(ceiling):
        raise NoQFoundError(
            f"no q <= {Qmax} brings the smoothness norm under {ceiling}"
        )
    return best_q, best_norm


# ---------------------------------------------------------------------
# Constructive partitions


def _local_monomial(phi, Q):
    """Monomial coefficients of t -> phi(base + t*step) on Q's index line."""
    return phi.compose_affine_frac(Q.step, Q.base).monomial_coeffs()


def _strip_leading(phi, Q, s):
    """Degree <= s-1 phase psi with phi - psi almost constant of order
    ||leading|| * t^s on Q (exact construction; see reduce proof)."""
    loc = _local_monomial(phi, Q)
    loc += [Fraction(0)] * max(0, s + 1 - len(loc))
    psi_local = PolyPhase(loc[:s] if s > 0 else loc[:1], basis="monomial", exact=phi.exact)
    inv_a = Fraction(1, Q.step)
    inv_b = Fraction(-Q.base, Q.step)
    return psi_local.compose_affine_frac(inv_a, inv_b)


def _split_halves(Q):
    h = Q.len // 2
    return [
        Progression(Q.base, Q.step, h),
        Progression(Q.base + h * Q.step, Q.step, Q.len - h),
    ]


def block_length_floor(eps0, s, theta, length, n_w):
    """The documented block-length formula: data-driven, clamped to 1."""
    eps0 = max(lift(eps0), Fraction(1, 2**40))
    ratio = lift(theta) / eps0
    # integer floor of ratio**(1/s), seeded in floats and corrected exactly
    ell = max(1, int(float(ratio) ** (1.0 / s)))
    while ell > 1 and ell**s > ratio:
        ell -= 1
    while (ell + 1) ** s <= ratio:
        ell += 1
    return max(1, min(ell, max(1, length // n_w)))


def reduce_degree_partition(phi, P, theta_target):
    """Partition P so that on each part phi agrees with a phase of one
    lower degree up to diameter theta_target (verified exhaustively).

    Weyl step: kill the leading local coefficient along a common
    difference n_w, then chop into blocks whose leading-term variation
    stays below the target.  Parts that fail the exhaustive check are
    halved until they pass (length-1 parts always do).
    """
    theta = lift(theta_target)
    if not 0 < theta <= HALF:
        raise PreconditionError("theta_target must lie in (0, 1/2]")
    if P.len < 2:
        raise PreconditionError("progression must have length >= 2")
    if phi.declared_degree < 1:
        raise PreconditionError("phase must have declared degree >= 1")

    s = phi.degree
    if s == 0:
        # constant mod 1 (e.g. c + 0*n): single part, constant companion
        return [(P, PolyPhase.constant(phi.eval(P.base), exact=phi.exact))]

    lead = _local_monomial(phi, P)[s]
    # Weyl step: scan common differences up to max(sqrt(len), 64) and
    # keep the one whose induced block length is largest (ties to the
    # smallest difference).  The sqrt bound alone misses exact rational
    # kills whose denominator lies between sqrt(len) and len.
    bound = max(1, min(P.len - 1, max(isqrt(P.len), 64)))
    n_w, ell = 1, 1
    best_key = None
    for n in range(1, bound + 1):
        v = circ_norm(lead * n**s)
        b = block_length_floor(v, s, theta, P.len, n)
        if best_key is None or b > best_key:
            n_w, ell, best_key = n, b, b

    out = []
    for Q in subdivide(P, n_w, ell):
        stack = [Q]
        while stack:
            R = stack.pop()
            psi = _strip_leading(phi, R, s)
            diff = phi - psi
            if R.len == 1 or circle_diam([diff.eval(n) for n in R.elements()]) <= theta:
                out.append((R, psi))
            else:
                stack.extend(reversed(_split_halves(R)))
    out.sort(key=lambda t: t[0].base)
    return out


def _merge_parts(phi, parts, eps):
    """Coarsen: greedily absorb a following contiguous same-step part
    (or a singleton) while the exhaustive diameter stays within eps."""
    eps = lift(eps)
    by_base = {p.base: p for p in parts}
    order = sorted(by_base)
    merged = []
    used = set()
    for b in order:
        if b in used:
            continue
        cur = by_base[b]
        used.add(b)
        while True:
            nxt_base = cur.base + cur.len * cur.step
            cand = by_base.get(nxt_base)
            if cand is None or cand.base in used:
                break
            if cand.step == cur.step:
                trial = Progression(cur.base, cur.step, cur.len + cand.len)
            elif cand.len == 1:
                trial = Progression(cur.base, cur.step, cur.len + 1)
            else:
                break
            if circle_diam([phi.eval(n) for n in trial.elements()]) <= eps:
                used.add(cand.base)
                cur = trial
            else:
                break
        merged.append(cur)
    return merged


def partition_polyphase(phi, P, eps):
    """Certificate partition of P with exhaustive diam(phi) <= eps on
    every part.

    Recurses on the degree, giving degree j the budget
    eps * (6/pi^2) / j^2 so the telescoping sum of the per-level
    companions stays below eps; a part is emitted early whenever the
    true phase already satisfies the target on it, and adjacent parts
    are greedily re-merged under the exhaustive check afterwards.
    """
    from .progressions import PartitionCertificate

    eps_f = lift(eps)
    if not 0 < eps_f <= HALF:
        raise PreconditionError("eps must lie in (0, 1/2]")

    parts = []

    def rec(phase, Q):
        if circle_diam([phi.eval(n) for n in Q.elements()]) <= eps_f:
            parts.append(Q)
            return
        s = phase.degree
        if s == 0 or Q.len == 1:
            parts.append(Q)
            return
        theta = eps_f * BUDGET_WEIGHT / s**2
        for R, psi in reduce_degree_partition(phase, Q, theta):
            rec(psi, R)

    rec(phi, P)
    parts = _merge_parts(phi, parts, eps_f)
    parts.sort(key=lambda p: p.base)
    witnesses = [diam_on(phi, p) for p in parts]
    assert all(lift(w) <= eps_f for w in witnesses)
    return PartitionCertificate(
        source=P,
        parts=parts,
        epsilon=float(eps_f),
        diam_witness=[float(w) for w in witnesses],
        channel="polyphase",
        payload={"phase": phi.to_json()},
    )
