"""Functions on Z_M, Gowers uniformity norms, the Lambda_k average and
its generalised von Neumann control, and constructive inverse oracles.

Conventions.  The U^k norm is the standard 2^k-fold cube average

    ||f||_{U^k}^{2^k} = E_{n, h_1..h_k in Z_M}
        prod_{omega in {0,1}^k} C^{|omega|} f(n + omega . h),

computed recursively through multiplicative derivatives
(D_h f)(n) = f(n+h) conj(f(n)), with a closed FFT form at k = 2:
||f||_{U^2}^4 = sum_r |f^(r)|^4 for f^(r) = E_n f(n) e(-rn/M).

Sets A in [1..N] embed into Z_M with M the smallest power of two
>= 2kN, so no counted k-term progression wraps around and the FFT is
cheap.  Lambda_k over the embedded window then relates to the genuine
AP count of A by  count_with_trivial = Lambda_k(1_A,..,1_A) * M^2
restricted to the window (each AP and its mirror both counted).
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BudgetExceededError, InvalidArgumentError
from .oracle import work_budget

TOL = 2.0**-30


@dataclass(frozen=True)
class DenseSet:
    """Subset of [1..N], kept sorted and distinct."""

    N: int
    members: tuple

    def __init__(self, N, members):
        ms = tuple(sorted(set(int(m) for m in members)))
        if N < 1:
            raise InvalidArgumentError("N must be positive")
        if ms and not (1 <= ms[0] and ms[-1] <= N):
            raise InvalidArgumentError("members must lie in [1..N]")
        object.__setattr__(self, "N", int(N))
        object.__setattr__(self, "members", ms)

    @property
    def density(self):
        return len(self.members) / self.N

    @property
    def density_exact(self):
        return Fraction(len(self.members), self.N)

    def __len__(self):
        return len(self.members)

    def indicator(self, M=None):
        """0/1 array over Z_M (window [1..N] embedded at its residues)."""
        M = M or self.N + 1
        a = np.zeros(M)
        a[np.array(self.members, dtype=np.int64) % M] = 1.0
        return a

    def to_json(self):
        return {"N": self.N, "members": list(self.members)}

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["N"]), obj["members"])


class GroupFunction:
    """Complex-valued function on Z_M with an optional 1-bounded flag."""

    __slots__ = ("M", "values", "bounded")

    def __init__(self, values, bounded=False):
        self.values = np.asarray(values, dtype=complex)
        if self.values.ndim != 1 or len(self.values) < 1:
            raise InvalidArgumentError("values must be a nonempty 1-d array")
        self.M = len(self.values)
        if bounded and np.max(np.abs(self.values)) > 1 + TOL:
            raise InvalidArgumentError("bounded flag set but sup norm exceeds 1")
        self.bounded = bounded

    @classmethod
    def character(cls, M, r):
        n = np.arange(M)
        return cls(np.exp(2j * np.pi * r * n / M), bounded=True)

    def fourier(self):
        """f^(r) = E_n f(n) e(-rn/M)."""
        return np.fft.fft(self.values) / self.M

    def to_json(self):
        return {
            "M": self.M,
            "re": [float(v) for v in self.values.real],
            "im": [float(v) for v in self.values.imag],
        }

    @classmethod
    def from_json(cls, obj):
        vals = np.array(obj["re"], dtype=float) + 1j * np.array(obj["im"], dtype=float)
        if len(vals) != int(obj["M"]):
            raise InvalidArgumentError("length disagrees with declared modulus")
        return cls(vals)


@dataclass(frozen=True)
class InverseWitness:
    """A structured function correlating with f: |E_n f(n) conj(w(n))| = delta."""

    kind: str  # "fourier" | "polyphase" | "nilsequence"
    params: dict
    correlation: float

    @property
    def delta(self):
        return self.correlation

    def witness_values(self, M):
        n = np.arange(M)
        if self.kind == "fourier":
            return np.exp(2j * np.pi * self.params["r"] * n / M)
        if self.kind == "polyphase":
            from .polyphase import PolyPhase

            phi = PolyPhase.from_json(self.params["phase"])
            return np.exp(2j * np.pi * np.array([float(phi.eval(i)) for i in n]))
        raise InvalidArgumentError(f"unknown witness kind {self.kind!r}")

    def recompute(self, f):
        return abs(np.mean(f.values * np.conj(self.witness_values(f.M))))

    def to_json(self):
        return {"kind": self.kind, "params": self.params, "correlation": self.correlation}


def m_embed(N, k):
    """Smallest power of two >= 2kN: FFT-friendly, no wraparound APs."""
    M = 1
    while M < 2 * k * N:
        M *= 2
    return M


def balanced(A, k=3):
    """Balanced function 1_A - alpha 1_[N] embedded in Z_{m_embed(N,k)}.

    The window mean is zero exactly: values are the rationals 1 - |A|/N
    and -|A|/N, materialized as doubles but summed to zero in exact
    arithmetic by construction (N * alpha = |A| is an integer identity).
    """
    M = m_embed(A.N, k)
    alpha = A.density_exact
    vals = np.zeros(M)
    vals[1 : A.N + 1] = float(-alpha)
    if A.members:
        vals[np.array(A.members, dtype=np.int64)] += 1.0
    return GroupFunction(vals, bounded=True)


def _derivative(values, h):
    return np.roll(values, -h) * np.conj(values)


def gowers_norm(f, k, budget=None):
    """U^k norm on Z_M via the multiplicative-derivative recursion;
    k = 2 has an FFT fast path agreeing with the recursion to 2^-30."""
    if k < 1:
        raise InvalidArgumentError("k must be >= 1")
    values = f.values if isinstance(f, GroupFunction) else np.asarray(f, dtype=complex)
    M = len(values)
    if k == 1:
        return float(abs(np.mean(values)))
    if k == 2:
        fh = np.fft.fft(values) / M
        return float(np.sum(np.abs(fh) ** 4)) ** 0.25
    budget = budget or work_budget()
    if M ** (k + 1) > budget:
        raise BudgetExceededError(
            f"U^{k} on Z_{M} needs M^(k+1) = {M**(k+1)} > budget {budget}"
        )

    def power(vals, j):
        # ||vals||_{U^j}^{2^j}
        if j == 2:
            fh = np.fft.fft(vals) / len(vals)
            return float(np.sum(np.abs(fh) ** 4))
        return float(
            np.mean([power(_derivative(vals, h), j - 1) for h in range(len(vals))])
        )

    return max(power(values, k), 0.0) ** (1.0 / 2**k)


def lambda_k(fs):
    """Lambda_k(f_0..f_{k-1}) = E_{n,d} prod_i f_i(n + i d) on Z_M."""
    if not fs:
        raise InvalidArgumentError("need at least one slot")
    vals = [f.values if isinstance(f, GroupFunction) else np.asarray(f, complex) for f in fs]
    M = len(vals[0])
    if any(len(v) != M for v in vals):
        raise InvalidArgumentError("all slots must share one modulus")
    total = 0.0 + 0.0j
    for d in range(M):
        prod = vals[0].copy()
        idx = np.arange(M)
        for i in range(1, len(vals)):
            prod = prod * vals[i][(idx + i * d) % M]
        total += prod.sum()
    return total / M**2


def lambda_k_exact(sets_as_indicators, M):
    """Integer sum_{n,d} prod_i a_i(n + i d) for 0/1 integer arrays."""
    vals = [np.asarray(a, dtype=np.int64) for a in sets_as_indicators]
    idx = np.arange(M)
    total = 0
    for d in range(M):
        prod = vals[0].copy()
        for i in range(1, len(vals)):
            prod = prod * vals[i][(idx + i * d) % M]
        total += int(prod.sum())
    return total


def ap_count(A, k, nontrivial=True):
    """Exact number of k-term APs in A (d > 0 if nontrivial, else d >= 0
    with each trivial progression counted once).

    Direct enumeration with a vectorized d-scan; the Lambda_k embedding
    identity (count over all signed d equals Lambda_k * M^2 on the
    window) is exercised in tests, not relied on here.
    """
    if k < 3:
        raise InvalidArgumentError("k must be >= 3")
    count = 0 if nontrivial else len(A.members)
    if len(A.members) < k:
        return count
    N = A.N
    ind = np.zeros(N + 1, dtype=bool)
    ind[np.array(A.members, dtype=np.int64)] = True
    for d in range(1, (N - 1) // (k - 1) + 1):
        hits = ind[1 : N + 1 - (k - 1) * d]
        for i in range(1, k):
            hits = hits & ind[1 + i * d : N + 1 - (k - 1) * d + i * d]
        count += int(hits.sum())
    return count


def von_neumann_check(fs):
    """|Lambda_k| <= min_i ||f_i||_{U^{k-1}} + 2^-30 for 1-bounded slots."""
    for f in fs:
        if not (isinstance(f, GroupFunction) and f.bounded):
            raise InvalidArgumentError("all slots must be certified 1-bounded")
    k = len(fs)
    lhs = abs(lambda_k(fs))
    rhs = min(gowers_norm(f, k - 1) for f in fs)
    return {"lhs": float(lhs), "rhs": float(rhs), "ok": bool(lhs <= rhs + TOL)}


def inverse_u2(f, delta):
    """Largest-Fourier-coefficient witness when ||f||_{U^2} >= delta.

    Since ||f||_{U^2}^4 = sum_r |f^(r)|^4 <= max_r |f^(r)|^2 sum |f^(r)|^2
    and sum_r |f^(r)|^2 = E|f|^2 <= 1, the returned correlation is at
    least delta^2.  Returns None when the norm is below delta.
    """
    if gowers_norm(f, 2) < delta:
        return None
    fh = f.fourier()
    r = int(np.argmax(np.abs(fh)))
    return InverseWitness(
        kind="fourier", params={"r": r, "M": f.M}, correlation=float(abs(fh[r]))
    )


def catalog_inverse(f, k, grid=64, threshold=0.1, budget=None):
    """Best correlating grid quadratic phase e(theta C(n,2) + c n), the
    constructive stand-in for the degree-(k-2) inverse oracle at k = 4.

    Scans theta, c in (1/grid) Z; grid must divide M so each candidate
    is well-defined on Z_M.  Documented incomplete: genuine two-step
    nilsequence witnesses fall outside this catalog and come back
    not-found (None).
    """
    if k != 4:
        raise InvalidArgumentError("the catalog oracle is implemented for k = 4")
    M = f.M
    if M % grid != 0:
        raise InvalidArgumentError("grid must divide the modulus")
    budget = budget or work_budget()
    if grid * grid * M > budget:
        raise BudgetExceededError("grid^2 * M exceeds the work budget")
    n = np.arange(M)
    cn2 = (n * (n - 1) // 2) % grid
    best = (0.0, None)
    for a in range(grid):
        phase_a = (a * cn2) % grid
        for b in range(grid):
            w = np.exp(2j * np.pi * ((phase_a + b * n) % grid) / grid)
            corr = abs(np.mean(f.values * np.conj(w)))
            if corr > best[0] + TOL:
                best = (float(corr), (a, b))
    corr, ab = best
    if ab is None or corr < threshold:
        return None
    from .polyphase import PolyPhase

    a, b = ab
    phi = PolyPhase.binomial([0, Fraction(b, grid), Fraction(a, grid)])
    return InverseWitness(
        kind="polyphase", params={"phase": phi.to_json(), "M": M}, correlation=corr
    )
