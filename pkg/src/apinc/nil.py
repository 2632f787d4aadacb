"""Explicit nilmanifolds, polynomial sequences, and nilsequence
partitions with exhaustive diameter certificates.

Two families are supported with their standard integer lattices:

  * the torus T^d = R^d / Z^d, whose points we store as coordinates in
    [0,1)^d with the max-of-circle-distances metric;
  * the Heisenberg quotient, upper triangular unipotent 3x3 matrices
    parameterized as (x, y, z) with group law
        (x,y,z) * (x',y',z') = (x+x', y+y', z+z'+x*y'),
    modulo the integer lattice on the right.  The fundamental-domain
    representative of (x,y,z) is ({x}, {y}, frac(z - x*floor(y))) —
    reduce y, then x, correcting z through the group law — and the
    metric is again the max of coordinate circle distances.

A polynomial sequence assigns each coordinate an exact-coefficient
polynomial: torus coordinates are phases (only their values mod 1
matter) while Heisenberg coordinates are genuine real polynomials,
because the z-correction x*floor(y) sees the integer parts.  Lipschitz
functions come from a small catalog of products of per-coordinate
periodic factors — complex exponentials e(k*u), their real and
imaginary parts, and the bump cos^2(pi*u) — times a 1-bounded
prefactor; since each factor is periodic in its coordinate, the value
at a group element equals the value at its reduced representative.

The dimension-reduction step exploits exactly this product structure:
partition P so the pivot coordinate's phase is nearly constant, freeze
the pivot factors at their value on each part, and recurse on the
remaining coordinates — a manifold of strictly smaller dimension.
Every claimed deviation and every certificate diameter is re-checked
exhaustively.
"""

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    InvalidArgumentError,
    NoQFoundError,
    PreconditionError,
    UnsupportedManifoldError,
)
from .polyphase import PolyPhase, circ_dist, frac, lift, partition_polyphase
from .progressions import PartitionCertificate, Progression

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------
# Manifolds


@dataclass(frozen=True)
class Nilmanifold:
    kind: str  # "torus" | "heisenberg"
    dim: int
    complexity: float = 1.0

    @classmethod
    def torus(cls, d, complexity=1.0):
        if d < 0:
            raise InvalidArgumentError("torus dimension must be >= 0")
        return cls("torus", d, complexity)

    @classmethod
    def heisenberg(cls, complexity=1.0):
        return cls("heisenberg", 3, complexity)

    @property
    def ncoords(self):
        return self.dim

    def metric(self, a, b):
        """Max of coordinate circle distances between reduced points."""
        if len(a) != self.dim or len(b) != self.dim:
            raise InvalidArgumentError("coordinate count mismatch")
        if self.dim == 0:
            return 0.0
        return max(
            float(circ_dist(lift(float(u)), lift(float(v)))) for u, v in zip(a, b)
        )

    def to_json(self):
        return {"kind": self.kind, "dim": self.dim}

    @classmethod
    def from_json(cls, obj):
        if obj["kind"] == "torus":
            return cls.torus(int(obj["dim"]))
        if obj["kind"] == "heisenberg":
            return cls.heisenberg()
        raise UnsupportedManifoldError(f"unknown manifold kind {obj['kind']!r}")


def heisenberg_mul(a, b):
    """(x,y,z)*(x',y',z') in exact coordinates."""
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1])


def heisenberg_inv(a):
    x, y, z = a
    return (-x, -y, -z + x * y)


def heisenberg_reduce(x, y, z):
    """Fundamental-domain representative of (x,y,z) Gamma, exact."""
    x, y, z = lift(x), lift(y), lift(z)
    fy = y.numerator // y.denominator
    z = z - x * fy
    return (frac(x), frac(y), frac(z))


# ---------------------------------------------------------------------
# Polynomial sequences


@dataclass(frozen=True)
class PolySequence:
    """One polynomial per Mal'cev coordinate of the manifold.

    Torus coordinates are phases; Heisenberg coordinates are real
    polynomials (deg x, y <= s, deg z <= 2s for a degree-s sequence).
    """

    coords: tuple

    def __init__(self, coords):
        object.__setattr__(self, "coords", tuple(coords))

    @classmethod
    def torus_linear(cls, alphas):
        return cls([PolyPhase.monomial([0, a]) for a in alphas])

    @property
    def degree(self):
        return max((c.degree for c in self.coords), default=0)

    def compose_affine(self, a, b):
        return PolySequence([c.compose_affine_frac(a, b) for c in self.coords])

    def point(self, Mf, n):
        """Fundamental-domain coordinates of g(n)Gamma, exact Fractions."""
        if Mf.kind == "torus":
            if len(self.coords) != Mf.dim:
                raise InvalidArgumentError("sequence/manifold dimension mismatch")
            return tuple(c.eval(n) for c in self.coords)
        if Mf.kind == "heisenberg":
            if len(self.coords) != 3:
                raise InvalidArgumentError("Heisenberg sequences need 3 coordinates")
            x, y, z = (c.eval_real(n) for c in self.coords)
            return heisenberg_reduce(x, y, z)
        raise UnsupportedManifoldError(f"unknown manifold kind {Mf.kind!r}")

    def to_json(self):
        return {"coords": [c.to_json() for c in self.coords]}

    @classmethod
    def from_json(cls, obj):
        return cls([PolyPhase.from_json(c) for c in obj["coords"]])


@dataclass(frozen=True)
class HorizontalCharacter:
    """Integer vector k acting on the abelianization: torus —
    eta(x) = k . x mod 1; Heisenberg — eta(x,y,z) = k1 x + k2 y mod 1."""

    k: tuple

    def __init__(self, k):
        object.__setattr__(self, "k", tuple(int(v) for v in k))

    @property
    def nontrivial(self):
        return any(self.k)

    @property
    def lipschitz(self):
        return float(sum(abs(v) for v in self.k))


def horizontal_apply(eta, g):
    """The phase eta(g(n)) as a PolyPhase."""
    ks = eta.k
    if len(ks) != len(g.coords) and not (len(ks) == 2 and len(g.coords) == 3):
        raise InvalidArgumentError("character/sequence dimension mismatch")
    acc = PolyPhase.zero()
    for kv, c in zip(ks, g.coords):
        if kv:
            acc = acc + c.scale(kv)
    return acc


# ---------------------------------------------------------------------
# Lipschitz function catalog

_FACTOR_LIPSCHITZ = {"exp": TWO_PI, "exp_re": TWO_PI, "exp_im": TWO_PI, "bump": math.pi}


@dataclass(frozen=True)
class Factor:
    coord: int
    kind: str  # "exp" | "exp_re" | "exp_im" | "bump"
    k: int = 1
    shift: float = 0.0

    def value(self, u):
        u = float(u) + self.shift
        if self.kind == "bump":
            return math.cos(math.pi * u) ** 2
        w = cmath.exp(2j * math.pi * self.k * u)
        if self.kind == "exp":
            return w
        if self.kind == "exp_re":
            return w.real
        if self.kind == "exp_im":
            return w.imag
        raise InvalidArgumentError(f"unknown factor kind {self.kind!r}")

    @property
    def lipschitz(self):
        return _FACTOR_LIPSCHITZ[self.kind] * max(abs(self.k), 1)


@dataclass(frozen=True)
class LipschitzFunction:
    """Product of periodic per-coordinate factors times a 1-bounded
    prefactor; Lipschitz constant (max-of-circle-distances metric) is
    the sum of factor constants, since each factor is 1-bounded."""

    name: str
    factors: tuple
    prefactor: complex = 1.0 + 0.0j

    def __post_init__(self):
        if abs(self.prefactor) > 1 + 2**-40:
            raise InvalidArgumentError("prefactor must be 1-bounded")

    @property
    def lipschitz(self):
        return float(sum(f.lipschitz for f in self.factors))

    def coord_lipschitz(self, coord):
        return float(sum(f.lipschitz for f in self.factors if f.coord == coord))

    @property
    def used_coords(self):
        return sorted({f.coord for f in self.factors})

    def value(self, coords):
        val = complex(self.prefactor)
        for f in self.factors:
            val *= f.value(coords[f.coord])
        return val

    def freeze(self, coord, u):
        """Fold the factors on `coord` into the prefactor at value u and
        shift the higher coordinate indices down by one."""
        pref = complex(self.prefactor)
        kept = []
        for f in self.factors:
            if f.coord == coord:
                pref *= f.value(u)
            else:
                c = f.coord - 1 if f.coord > coord else f.coord
                kept.append(Factor(c, f.kind, f.k, f.shift))
        # folding 1-bounded factors cannot push |pref| above 1; guard fp fuzz
        if abs(pref) > 1:
            pref /= abs(pref) * (1 + 2**-50)
        return LipschitzFunction(f"{self.name}|frozen", tuple(kept), pref)

    def to_json(self):
        return {
            "name": self.name,
            "prefactor_re": self.prefactor.real,
            "prefactor_im": self.prefactor.imag,
            "factors": [
                {"coord": f.coord, "kind": f.kind, "k": f.k, "shift": f.shift}
                for f in self.factors
            ],
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            obj.get("name", "custom"),
            tuple(
                Factor(
                    int(f["coord"]),
                    f["kind"],
                    int(f.get("k", 1)),
                    float(f.get("shift", 0.0)),
                )
                for f in obj["factors"]
            ),
            complex(obj.get("prefactor_re", 1.0), obj.get("prefactor_im", 0.0)),
        )


_COORD_NAMES = {"x": 0, "y": 1, "z": 2}


def lipschitz_catalog(name):
    """Built-in 1-bounded functions by name.

    Names: "const"; "e(x)", "e(y)", "e(z)" (and re-/im- prefixed
    variants); "bump(x)", "bump(y)"; "e(x)*cutoff" = e(x) * cos^2(pi y).
    """
    if name == "const":
        return LipschitzFunction("const", ())
    if name == "e(x)*cutoff":
        return LipschitzFunction(name, (Factor(0, "exp"), Factor(1, "bump")))
    for prefix, kind in (("re-e(", "exp_re"), ("im-e(", "exp_im"), ("e(", "exp")):
        if name.startswith(prefix) and name.endswith(")"):
            var = name[len(prefix) : -1]
            if var in _COORD_NAMES:
                return LipschitzFunction(name, (Factor(_COORD_NAMES[var], kind),))
    if name.startswith("bump(") and name.endswith(")"):
        var = name[5:-1]
        if var in _COORD_NAMES:
            return LipschitzFunction(name, (Factor(_COORD_NAMES[var], "bump"),))
    raise InvalidArgumentError(f"unknown catalog function {name!r}")


def _check_compat(Mf, g, F):
    if Mf.kind == "torus":
        if len(g.coords) != Mf.dim:
            raise InvalidArgumentError("sequence/manifold dimension mismatch")
        bad = [c for c in F.used_coords if c >= Mf.dim]
    else:
        if len(g.coords) != 3:
            raise InvalidArgumentError("Heisenberg sequences need 3 coordinates")
        # only x and y support functions that are well-defined through
        # the product-of-periodic-factors catalog on the quotient
        bad = [c for c in F.used_coords if c >= 2]
    if bad:
        raise UnsupportedManifoldError(
            f"function uses coordinate {bad[0]} unavailable on {Mf.kind}(dim {Mf.dim})"
        )


def nil_eval(Mf, g, F, n):
    """F at the fundamental-domain reduction of g(n); |result| <= 1."""
    _check_compat(Mf, g, F)
    return F.value(g.point(Mf, n))


def nil_values(Mf, g, F, P):
    _check_compat(Mf, g, F)
    return np.array([F.value(g.point(Mf, n)) for n in P.elements()])


def complex_diam(vals):
    """Exhaustive diameter of a complex point set (pairwise sup)."""
    vals = np.asarray(vals)
    if len(vals) < 2:
        return 0.0
    if len(vals) > 1200:
        # the diameter is attained on the convex hull; for degenerate
        # (collinear) clouds it is between the extremes along the
        # principal axis
        pts = np.unique(np.c_[vals.real, vals.imag], axis=0)
        if len(pts) > 2:
            try:
                from scipy.spatial import ConvexHull, QhullError

                pts = pts[ConvexHull(pts).vertices]
            except QhullError:
                ctr = pts - pts.mean(axis=0)
                direction = np.linalg.svd(ctr, full_matrices=False)[2][0]
                proj = ctr @ direction
                pts = pts[[int(np.argmin(proj)), int(np.argmax(proj))]]
        vals = pts[:, 0] + 1j * pts[:, 1]
    best = 0.0
    for i in range(len(vals) - 1):
        best = max(best, float(np.max(np.abs(vals[i + 1 :] - vals[i]))))
    return best


# ---------------------------------------------------------------------
# Factorisation g = beta * g' * gamma


@dataclass(frozen=True)
class Factorization:
    beta: PolySequence
    gprime: PolySequence
    gamma: PolySequence
    subgroup: Nilmanifold
    q: int
    pivot: int
    smooth_constant: float


def _rational_period(phi, Qmax):
    """Smallest T >= 1 with phi(t+T) - phi(t) integer-valued, if any."""
    for T in range(1, Qmax + 1):
        diff = phi.compose_affine_frac(1, T) - phi
        if all(a.denominator == 1 for a in diff.binomial_coeffs()):
            return T
    return None


def factorize_polyseq(Mf, g, P, eta, Qmax=64):
    """Factor g = beta * g' * gamma on P (rescaled to t in [1..N]):
    gamma rational of period q <= Qmax, g' confined to a coordinate
    subgroup of dimension dim - 1, beta a small smooth drift.

    Requires diam_P(eta o g) <= 1/10 and eta supported on a single
    coordinate of the abelianization (the cases the dimension reduction
    ever produces); other characters are reported unsupported rather
    than silently mishandled.
    """
    if Mf.kind not in ("torus", "heisenberg"):
        raise UnsupportedManifoldError(f"unknown manifold kind {Mf.kind!r}")
    _ = g.point(Mf, 0)  # dimension sanity
    support = [i for i, kv in enumerate(eta.k) if kv]
    if len(support) != 1:
        raise UnsupportedManifoldError(
            "factorisation implemented for single-coordinate characters"
        )
    pivot = support[0]
    kp = eta.k[pivot]
    N = P.len

    phi = horizontal_apply(eta, g)
    # local coordinates: t in [1..N] <-> elements of P
    phi_loc = phi.compose_affine_frac(P.step, P.base - P.step)

    from .polyphase import signed_rep, smoothness_norm

    # entry condition: some q <= Qmax makes q*phi smooth on [N], i.e.
    # phi is a small drift away from a denominator-q rational phase
    # (diam_P(phi) <= 1/10 is the q = 1 special case)
    q, drift = 1, None
    for cand in range(1, Qmax + 1):
        v = smoothness_norm(phi_loc.scale(cand), N) / cand
        if drift is None or v < drift:
            q, drift = cand, v
    if drift > Fraction(1, 10):
        raise PreconditionError(
            f"no q <= {Qmax} leaves drift {float(drift):.6f} <= 1/10; restrict P first"
        )

    alphas = phi_loc.binomial_coeffs()
    sigma = [Fraction(0)]
    epsv = [alphas[0]]  # constant goes with the smooth part
    for a in alphas[1:]:
        near = Fraction(round(q * a), q)
        sigma.append(frac(near))
        epsv.append(signed_rep(a - near))
    sig_phase = PolyPhase(sigma, basis="binomial", exact=True)
    eps_phase = PolyPhase(epsv, basis="binomial", exact=g.coords[pivot].exact)

    b_poly = eps_phase.scale(Fraction(1, kp))  # beta pivot coordinate
    c_poly = sig_phase.scale(Fraction(1, kp))  # gamma pivot coordinate

    period = _rational_period(c_poly, Qmax)
    if period is None:
        raise NoQFoundError(f"gamma has no period <= {Qmax}")

    zero = PolyPhase.zero()
    g_loc = g.compose_affine(P.step, P.base - P.step)

    if Mf.kind == "torus":
        beta = PolySequence(
            [b_poly if i == pivot else zero for i in range(Mf.dim)]
        )
        gamma = PolySequence(
            [c_poly if i == pivot else zero for i in range(Mf.dim)]
        )
        gp = [
            (g_loc.coords[i] - b_poly - c_poly) if i == pivot else g_loc.coords[i]
            for i in range(Mf.dim)
        ]
        gprime = PolySequence(gp)
        subgroup = Nilmanifold.torus(Mf.dim - 1, Mf.complexity)
    else:
        x, y, z = g_loc.coords
        if pivot == 0:
            beta = PolySequence([b_poly, zero, zero])
            gamma = PolySequence([c_poly, zero, zero])
            # (b,0,0)*(0,y,z')*(c,0,0) = (b+c, y, z'+b*y): kill z' drift
            gprime = PolySequence([x - b_poly - c_poly, y, z - _poly_prod(b_poly, y)])
        else:
            beta = PolySequence([zero, b_poly, zero])
            gamma = PolySequence([zero, c_poly, zero])
            # (0,b,0)*(x,0,z')*(0,c,0) = (x, b+c, z'+x*c)
            gprime = PolySequence([x, y - b_poly - c_poly, z - _poly_prod(x, c_poly)])
        subgroup = Nilmanifold.torus(2, Mf.complexity)

    # measured smoothness constant of beta on deterministic pairs
    C = 0.0
    samples = sorted({1, N, max(1, N // 3), max(1, 2 * N // 3), max(1, N // 2)})
    for i, t1 in enumerate(samples):
        for t2 in samples[i + 1 :]:
            dd = float(circ_dist(b_poly.eval_real(t1), b_poly.eval_real(t2)))
            C = max(C, dd * N / abs(t2 - t1))
    return Factorization(beta, gprime, gamma, subgroup, period, pivot, C)


def _poly_prod(p, q):
    """Product of two polynomials given as PolyPhase coefficient holders."""
    a = p.monomial_coeffs()
    b = q.monomial_coeffs()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, u in enumerate(a):
        if u:
            for j, v in enumerate(b):
                out[i + j] += u * v
    return PolyPhase(out, basis="monomial", exact=p.exact and q.exact)


def factorization_product(Mf, fac, t):
    """Coordinates of beta(t)*g'(t)*gamma(t) (exact), for identity checks."""
    if Mf.kind == "torus":
        return tuple(
            b.eval_real(t) + g.eval_real(t) + c.eval_real(t)
            for b, g, c in zip(fac.beta.coords, fac.gprime.coords, fac.gamma.coords)
        )
    bt = tuple(c.eval_real(t) for c in fac.beta.coords)
    gt = tuple(c.eval_real(t) for c in fac.gprime.coords)
    ct = tuple(c.eval_real(t) for c in fac.gamma.coords)
    return heisenberg_mul(heisenberg_mul(bt, gt), ct)


# ---------------------------------------------------------------------
# Dimension reduction and the nilsequence partition


def reduce_dimension(Mf, g, F, P, eps):
    """Partition P and hand each part a nilsequence on a manifold of
    one smaller dimension agreeing with F(g(n)Gamma) to within eps.

    Pivot on the first coordinate F uses; partition P so the pivot
    coordinate phase moves by at most eps / L_pivot, then freeze the
    pivot factors at their value at each part's base point.  Since the
    catalog functions are products of periodic per-coordinate factors,
    the deviation bound |F - F_frozen| <= L_pivot * coordinate-distance
    is exact; it is still re-checked exhaustively, with halving repair.
    """
    _check_compat(Mf, g, F)
    if Mf.dim < 1:
        raise PreconditionError("manifold must have dimension >= 1")
    eps_f = lift(eps)
    if not 0 < eps_f <= Fraction(1, 2):
        raise PreconditionError("eps must lie in (0, 1/2]")

    if Mf.kind == "torus":
        succ = Nilmanifold.torus(Mf.dim - 1, Mf.complexity)
        coord_phases = list(g.coords)
    else:
        succ = Nilmanifold.torus(2, Mf.complexity)
        coord_phases = list(g.coords)

    if not F.factors:
        point = Nilmanifold.torus(0, Mf.complexity)
        return [(P, point, PolySequence([]), F)]

    pivot = F.factors[0].coord
    Lp = F.coord_lipschitz(pivot)
    target = min(eps_f / lift(Lp), Fraction(1, 2))
    cert = partition_polyphase(coord_phases[pivot], P, target)

    rest = [c for i, c in enumerate(coord_phases) if i != pivot]
    out = []
    for Q in cert.parts:
        stack = [Q]
        while stack:
            R = stack.pop()
            c0 = float(coord_phases[pivot].eval(R.base))
            F2 = F.freeze(pivot, c0)
            h = PolySequence(rest)
            dev = max(
                abs(nil_eval(Mf, g, F, n) - F2.value(tuple(p.eval(n) for p in rest)))
                for n in R.elements()
            )
            if R.len == 1 or dev <= float(eps_f) + 2**-30:
                out.append((R, succ, h, F2))
            else:
                h1 = R.len // 2
                stack.append(Progression(R.base + h1 * R.step, R.step, R.len - h1))
                stack.append(Progression(R.base, R.step, h1))
    out.sort(key=lambda t: t[0].base)
    return out


def _merge_value_parts(valuer, parts, eps):
    """Greedy coarsening of progression parts under an exhaustive
    complex-diameter check on the true nilsequence values."""
    by_base = {p.base: p for p in parts}
    merged, used = [], set()
    for b in sorted(by_base):
        if b in used:
            continue
        cur = by_base[b]
        used.add(b)
        while True:
            nxt = by_base.get(cur.base + cur.len * cur.step)
            if nxt is None or nxt.base in used:
                break
            if nxt.step == cur.step:
                trial = Progression(cur.base, cur.step, cur.len + nxt.len)
            elif nxt.len == 1:
                trial = Progression(cur.base, cur.step, cur.len + 1)
            else:
                break
            if complex_diam(valuer(trial)) <= eps:
                used.add(nxt.base)
                cur = trial
            else:
                break
        merged.append(cur)
    return merged


def partition_nilsequence(Mf, g, F, P, eps):
    """Certificate partition of P with exhaustive diameter of
    n -> F(g(n)Gamma) at most eps on every part (complex modulus).

    Induction on the dimension: each level gets deviation budget
    eps / dim(Mf) and freezes one coordinate via reduce_dimension, so
    the per-part value diameter — a sum of per-coordinate oscillations
    — telescopes below eps.  Parts whose true values already fit are
    emitted early, and adjacent parts are re-merged under the
    exhaustive check.
    """
    _check_compat(Mf, g, F)
    eps_f = lift(eps)
    if not 0 < eps_f <= Fraction(1, 2):
        raise PreconditionError("eps must lie in (0, 1/2]")
    d0 = max(Mf.dim, 1)
    level_eps = eps_f / d0
    eps_val = float(eps_f)

    def valuer(Q):
        return nil_values(Mf, g, F, Q)

    parts = []
    max_depth = 0

    def rec(Mf2, g2, F2, Q, depth):
        nonlocal max_depth
        max_depth = max(max_depth, depth)
        if not F2.factors or Mf2.dim == 0 or Q.len == 1:
            parts.append(Q)
            return
        if complex_diam(valuer(Q)) <= eps_val:
            parts.append(Q)
            return
        for R, Mf3, g3, F3 in reduce_dimension(Mf2, g2, F2, Q, level_eps):
            rec(Mf3, g3, F3, R, depth + 1)

    rec(Mf, g, F, P, 0)
    parts = _merge_value_parts(valuer, parts, eps_val)
    parts.sort(key=lambda p: p.base)
    witnesses = [complex_diam(valuer(p)) for p in parts]
    assert all(w <= eps_val + 2**-35 for w in witnesses)
    return PartitionCertificate(
        source=P,
        parts=parts,
        epsilon=eps_val,
        diam_witness=[float(w) for w in witnesses],
        channel="nilsequence",
        payload={
            "manifold": Mf.to_json(),
            "sequence": g.to_json(),
            "function": F.to_json(),
            "depth": max_depth,
        },
    )
