"""Independent brute-force reference implementations.

Everything here re-derives results from first principles and shares no
logic with the construction modules it checks: phases are re-evaluated
by a local evaluator, diameters are pairwise scans, Gowers norms are
the literal cube sums, and certificates are verified structurally by
element enumeration.  These are the oracles behind every derived test
value and behind `apinc verify`.
"""

import cmath
import itertools
import math
import os
from fractions import Fraction

import numpy as np

from .errors import BudgetExceededError, CertificateError, InvalidArgumentError

DEFAULT_BUDGET = 10**9


def work_budget():
    return int(os.environ.get("APINC_BUDGET", DEFAULT_BUDGET))


# ---------------------------------------------------------------------
# AP counting


def brute_ap_count(A, k, nontrivial=True):
    """Count k-term APs in A by direct enumeration over (start, diff)."""
    members = sorted(set(A.members if hasattr(A, "members") else A))
    if len(members) > 10**4:
        raise BudgetExceededError("brute_ap_count limited to |A| <= 10^4")
    S = set(members)
    count = 0
    if not nontrivial:
        count += len(members)
    if len(members) < k:
        return count
    lo, hi = members[0], members[-1]
    for a in members:
        max_d = (hi - a) // (k - 1)
        for d in range(1, max_d + 1):
            if all(a + i * d in S for i in range(1, k)):
                count += 1
    return count


def max_ap_free(N, k=3):
    """Exact maximum size of a k-AP-free subset of [1..N], by
    branch-and-bound search (largest-element-first AP checks)."""
    if k < 3:
        raise InvalidArgumentError("k must be >= 3")
    if k == 3 and N > 30:
        raise BudgetExceededError("exhaustive tier limited to N <= 30 for k = 3")
    if N > 40:
        raise BudgetExceededError("exhaustive tier limited to N <= 40")

    best = 0
    chosen = []
    in_set = [False] * (N + 1)

    def extends_ap(n):
        # would n complete a k-AP as its largest element?
        for d in range(1, (n - 1) // (k - 1) + 1):
            if all(in_set[n - i * d] for i in range(1, k)):
                return True
        return False

    def dfs(n):
        nonlocal best
        if len(chosen) + (N - n + 1) <= best:
            return
        if n > N:
            best = max(best, len(chosen))
            return
        if not extends_ap(n):
            chosen.append(n)
            in_set[n] = True
            dfs(n + 1)
            in_set[n] = False
            chosen.pop()
        dfs(n + 1)

    dfs(1)
    return best


# ---------------------------------------------------------------------
# Gowers norms by literal cube summation


def brute_gowers(f, k, budget=None):
    """U^k norm via the 2^k-fold cube sum, no FFT, no recursion."""
    values = np.asarray(f.values if hasattr(f, "values") else f, dtype=complex)
    M = len(values)
    budget = budget or work_budget()
    if M ** (k + 1) > budget:
        raise BudgetExceededError(f"M^(k+1) = {M**(k+1)} exceeds budget {budget}")
    idx = np.arange(M)
    total = 0.0 + 0.0j
    for hs in itertools.product(range(M), repeat=k):
        prod = np.ones(M, dtype=complex)
        for omega in itertools.product((0, 1), repeat=k):
            shift = sum(w * h for w, h in zip(omega, hs)) % M
            term = values[(idx + shift) % M]
            if sum(omega) % 2 == 1:
                term = np.conj(term)
            prod = prod * term
        total += prod.sum()
    avg = total.real / M ** (k + 1)
    return max(avg, 0.0) ** (1.0 / 2**k)


# ---------------------------------------------------------------------
# Independent channel evaluation (certificate verification)


def _parse_coeffs(ph):
    exact = bool(ph.get("exact", True))
    out = []
    for c in ph["coeffs"]:
        out.append(Fraction(c) if exact else Fraction(float(c)))
    return out


def _falling_binom(n, j):
    num = 1
    for i in range(j):
        num *= n - i
    return num // math.factorial(j)


def _phase_value(ph, n):
    """Residue in [0,1) of the serialized phase at n (exact)."""
    coeffs = _parse_coeffs(ph)
    if ph["basis"] == "monomial":
        acc = Fraction(0)
        for c in reversed(coeffs):
            acc = acc * n + c
    else:
        acc = sum((c * _falling_binom(n, j) for j, c in enumerate(coeffs)), Fraction(0))
    return acc - (acc.numerator // acc.denominator)


def _phase_value_real(ph, n):
    coeffs = _parse_coeffs(ph)
    if ph["basis"] == "monomial":
        acc = Fraction(0)
        for c in reversed(coeffs):
            acc = acc * n + c
        return acc
    return sum((c * _falling_binom(n, j) for j, c in enumerate(coeffs)), Fraction(0))


def _ffrac(x):
    return x - (x.numerator // x.denominator)


def _heisenberg_reduce(x, y, z):
    """Fundamental-domain representative: reduce x, y to [0,1) by right
    lattice multiplication, correcting z by the group law, then reduce z."""
    fy = _ffrac(y)
    zc = z - x * (y.numerator // y.denominator)
    fx = _ffrac(x)
    return fx, fy, _ffrac(zc)


def _fn_value(fn, coords):
    val = complex(fn.get("prefactor_re", 1.0), fn.get("prefactor_im", 0.0))
    for fac in fn["factors"]:
        u = float(coords[fac["coord"]]) + float(fac.get("shift", 0.0))
        kind = fac["kind"]
        if kind == "bump":
            val *= math.cos(math.pi * u) ** 2
        else:
            w = cmath.exp(2j * math.pi * fac.get("k", 1) * u)
            if kind == "exp":
                val *= w
            elif kind == "exp_re":
                val *= w.real
            elif kind == "exp_im":
                val *= w.imag
            else:
                raise InvalidArgumentError(f"unknown factor kind {kind!r}")
    return val


def _nil_channel_value(payload, n):
    mf = payload["manifold"]
    seq = payload["sequence"]["coords"]
    if mf["kind"] == "torus":
        coords = [_phase_value(ph, n) for ph in seq]
    elif mf["kind"] == "heisenberg":
        x = _phase_value_real(seq[0], n)
        y = _phase_value_real(seq[1], n)
        z = _phase_value_real(seq[2], n)
        coords = list(_heisenberg_reduce(x, y, z))
    else:
        raise InvalidArgumentError(f"unknown manifold kind {mf['kind']!r}")
    return _fn_value(payload["function"], coords)


def brute_diam(channel_payload, P, channel="polyphase"):
    """Exhaustive diameter of a serialized channel over a progression.

    Polyphase channel: circle metric, exact pairwise scan.  Nilsequence
    channel: complex-modulus metric, pairwise scan.
    """
    if P.len > 10**6:
        raise BudgetExceededError("brute_diam limited to len <= 10^6")
    ns = P.elements()
    if channel == "polyphase":
        vals = sorted(_phase_value(channel_payload["phase"], n) for n in ns)
        best = Fraction(0)
        # pairwise over sorted circle values
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                d = vals[j] - vals[i]
                d = min(d, 1 - d)
                if d > best:
                    best = d
        return best
    if channel == "nilsequence":
        vals = np.array([_nil_channel_value(channel_payload, n) for n in ns])
        best = 0.0
        for i in range(len(vals)):
            best = max(best, float(np.max(np.abs(vals[i:] - vals[i]))))
        return best
    raise InvalidArgumentError(f"unknown channel {channel!r}")


# ---------------------------------------------------------------------
# Certificate verification

VERIFY_TOL = 2.0**-30


def verify_certificate(cert, budget=None):
    """Re-verify a PartitionCertificate JSON object from scratch.

    Checks disjointness, exact coverage of the source, the minimum part
    length, and recomputes every diameter witness with the independent
    channel evaluator.  Raises CertificateError with a machine-readable
    reason on the first violation; returns a report dict on success.
    """
    from .progressions import Progression

    if hasattr(cert, "to_json"):
        cert = cert.to_json()
    source = Progression.from_json(cert["source"])
    parts = [Progression.from_json(p) for p in cert["parts"]]
    eps = float(cert["epsilon"])
    channel = cert.get("channel", "polyphase")
    budget = budget or work_budget()
    if source.len > budget:
        raise BudgetExceededError("certificate too large for the verification budget")

    seen = {}
    for pi, p in enumerate(parts):
        for x in p.elements():
            if x in seen:
                raise CertificateError(
                    "parts-not-disjoint",
                    f"element {x} appears in parts {seen[x]} and {pi}",
                )
            seen[x] = pi
    src_elems = set(source.elements())
    extra = set(seen) - src_elems
    if extra:
        raise CertificateError(
            "coverage-excess", f"element {min(extra)} lies outside the source"
        )
    missing = src_elems - set(seen)
    if missing:
        raise CertificateError(
            "coverage-gap", f"element {min(missing)} is not covered by any part"
        )

    min_len = int(cert["min_len"])
    for pi, p in enumerate(parts):
        if p.len < min_len:
            raise CertificateError(
                "min-len-violated", f"part {pi} has length {p.len} < {min_len}"
            )

    witnesses = []
    for pi, (p, pj) in enumerate(zip(parts, cert["parts"])):
        d = float(brute_diam(cert["payload"], p, channel=channel))
        stored = float(pj["diam"])
        if d > eps + VERIFY_TOL:
            raise CertificateError(
                "diam-exceeds-epsilon",
                f"part {pi} has exhaustive diameter {d} > epsilon {eps}",
            )
        if abs(d - stored) > VERIFY_TOL:
            raise CertificateError(
                "witness-mismatch",
                f"part {pi}: stored witness {stored}, recomputed {d}",
            )
        witnesses.append(d)
    return {
        "ok": True,
        "channel": channel,
        "num_parts": len(parts),
        "min_len": min(p.len for p in parts),
        "max_diam": max(witnesses) if witnesses else 0.0,
    }
