import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apinc.errors import (
    InvalidArgumentError,
    PreconditionError,
    UnsupportedManifoldError,
)
from apinc.nil import (
    Factor,
    HorizontalCharacter,
    LipschitzFunction,
    Nilmanifold,
    PolySequence,
    complex_diam,
    factorization_product,
    factorize_polyseq,
    heisenberg_inv,
    heisenberg_mul,
    heisenberg_reduce,
    horizontal_apply,
    lipschitz_catalog,
    nil_eval,
    nil_values,
    partition_nilsequence,
    reduce_dimension,
)
from apinc.oracle import verify_certificate
from apinc.polyphase import PolyPhase
from apinc.progressions import Progression

SQRT2 = math.sqrt(2)
SQRT3 = math.sqrt(3)

rationals = st.fractions(min_value=-3, max_value=3, max_denominator=32)


class TestGroupLaw:
    def test_heisenberg_mul(self):
        a = (Fraction(1, 2), Fraction(1, 3), Fraction(0))
        b = (Fraction(1, 4), Fraction(1, 2), Fraction(1, 5))
        x, y, z = heisenberg_mul(a, b)
        assert (x, y) == (Fraction(3, 4), Fraction(5, 6))
        assert z == Fraction(1, 5) + Fraction(1, 2) * Fraction(1, 2)

    @given(
        coords=st.tuples(*[rationals] * 6),
    )
    @settings(max_examples=100, deadline=None)
    def test_inverse(self, coords):
        a, b = coords[:3], coords[3:]
        assert heisenberg_mul(a, heisenberg_inv(a)) == (0, 0, 0)
        # associativity with the inverse: (ab)b^{-1} = a
        assert heisenberg_mul(heisenberg_mul(a, b), heisenberg_inv(b)) == a

    @given(coords=st.tuples(*[rationals] * 3), lat=st.tuples(*[st.integers(-3, 3)] * 3))
    @settings(max_examples=150, deadline=None)
    def test_reduce_is_orbit_invariant(self, coords, lat):
        # right multiplication by a lattice element leaves the reduced
        # representative unchanged
        moved = heisenberg_mul(coords, lat)
        assert heisenberg_reduce(*moved) == heisenberg_reduce(*coords)

    def test_reduce_in_box(self):
        x, y, z = heisenberg_reduce(Fraction(7, 3), Fraction(-5, 4), Fraction(9, 7))
        for c in (x, y, z):
            assert 0 <= c < 1


class TestManifold:
    def test_metric_max_of_circle_distances(self):
        T = Nilmanifold.torus(2)
        assert abs(T.metric((0.1, 0.9), (0.2, 0.1)) - 0.2) < 1e-12

    @given(
        a=st.tuples(*[st.floats(0, 1, exclude_max=True)] * 2),
        b=st.tuples(*[st.floats(0, 1, exclude_max=True)] * 2),
        c=st.tuples(*[st.floats(0, 1, exclude_max=True)] * 2),
    )
    @settings(max_examples=150, deadline=None)
    def test_triangle_inequality(self, a, b, c):
        T = Nilmanifold.torus(2)
        assert T.metric(a, c) <= T.metric(a, b) + T.metric(b, c) + 1e-12

    def test_json_roundtrip(self):
        for Mf in (Nilmanifold.torus(3), Nilmanifold.heisenberg()):
            assert Nilmanifold.from_json(Mf.to_json()).kind == Mf.kind


class TestSequencesAndEval:
    def test_torus_rotation_fourth_roots(self):
        Mf = Nilmanifold.torus(1)
        g = PolySequence.torus_linear([Fraction(1, 4)])
        F = lipschitz_catalog("e(x)")
        vals = [nil_eval(Mf, g, F, n) for n in range(4)]
        expect = [1, 1j, -1, -1j]
        assert all(abs(v - e) < 1e-12 for v, e in zip(vals, expect))

    def test_heisenberg_z_sees_integer_parts(self):
        # g(n) = (n/2, n/2, 0): the reduced z-coordinate depends on
        # floor(y), so it is not a function of the coordinates mod 1
        Mf = Nilmanifold.heisenberg()
        g = PolySequence(
            [
                PolyPhase.monomial([0, Fraction(1, 2)]),
                PolyPhase.monomial([0, Fraction(1, 2)]),
                PolyPhase.zero(),
            ]
        )
        p1 = g.point(Mf, 1)
        p3 = g.point(Mf, 3)
        assert (p1[0], p1[1]) == (p3[0], p3[1])  # same abelian part
        assert p1[2] != p3[2]  # different z after reduction

    def test_point_matches_direct_reduction(self):
        Mf = Nilmanifold.heisenberg()
        g = PolySequence(
            [
                PolyPhase.monomial([0, Fraction(2, 7)]),
                PolyPhase.monomial([0, 0, Fraction(3, 5)]),
                PolyPhase.monomial([0, Fraction(1, 3)]),
            ]
        )
        for n in range(8):
            x, y, z = (c.eval_real(n) for c in g.coords)
            assert g.point(Mf, n) == heisenberg_reduce(x, y, z)

    def test_compose_affine_pointwise(self):
        Mf = Nilmanifold.torus(2)
        g = PolySequence(
            [PolyPhase.monomial([0, Fraction(1, 7)]), PolyPhase.monomial([0, 0, Fraction(1, 5)])]
        )
        h = g.compose_affine(3, 2)
        for m in range(10):
            assert h.point(Mf, m) == g.point(Mf, 3 * m + 2)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            PolySequence([PolyPhase.zero()]).point(Nilmanifold.torus(2), 1)


class TestHorizontal:
    def test_linear_combination(self):
        g = PolySequence.torus_linear([Fraction(1, 3), Fraction(1, 5)])
        eta = HorizontalCharacter((2, -1))
        phi = horizontal_apply(eta, g)
        for n in range(10):
            expect = Fraction(2 * n, 3) - Fraction(n, 5)
            assert phi.eval(n) == expect - math.floor(expect)

    def test_heisenberg_ignores_z(self):
        g = PolySequence(
            [
                PolyPhase.monomial([0, Fraction(1, 4)]),
                PolyPhase.monomial([0, Fraction(1, 6)]),
                PolyPhase.monomial([0, 0, Fraction(1, 2)]),
            ]
        )
        phi = horizontal_apply(HorizontalCharacter((1, 2)), g)
        for n in range(8):
            val = Fraction(n, 4) + 2 * Fraction(n, 6)
            assert phi.eval(n) == val - math.floor(val)

    def test_lipschitz(self):
        assert HorizontalCharacter((2, -3)).lipschitz == 5.0


class TestLipschitzFunctions:
    def test_catalog_names(self):
        for name in ("const", "e(x)", "e(y)", "e(z)", "re-e(x)", "im-e(y)",
                      "bump(x)", "bump(y)", "e(x)*cutoff"):
            F = lipschitz_catalog(name)
            assert isinstance(F, LipschitzFunction)

    def test_unknown_name(self):
        with pytest.raises(InvalidArgumentError):
            lipschitz_catalog("e(w)")

    def test_cutoff_value(self):
        F = lipschitz_catalog("e(x)*cutoff")
        v = F.value((0.25, 0.25))
        assert abs(v - 1j * math.cos(math.pi * 0.25) ** 2) < 1e-12

    def test_lipschitz_constants(self):
        assert lipschitz_catalog("e(x)").lipschitz == 2 * math.pi
        assert lipschitz_catalog("bump(y)").lipschitz == math.pi
        F = lipschitz_catalog("e(x)*cutoff")
        assert F.lipschitz == 2 * math.pi + math.pi
        assert F.coord_lipschitz(0) == 2 * math.pi

    @given(
        u=st.floats(0, 1, exclude_max=True),
        v=st.floats(0, 1, exclude_max=True),
        w1=st.floats(0, 1, exclude_max=True),
        w2=st.floats(0, 1, exclude_max=True),
    )
    @settings(max_examples=300, deadline=None)
    def test_lipschitz_bound_sampled(self, u, v, w1, w2):
        Mf = Nilmanifold.torus(2)
        F = lipschitz_catalog("e(x)*cutoff")
        d = Mf.metric((u, w1), (v, w2))
        assert abs(F.value((u, w1)) - F.value((v, w2))) <= F.lipschitz * d + 1e-9

    def test_freeze_folds_and_reindexes(self):
        F = lipschitz_catalog("e(x)*cutoff")
        F2 = F.freeze(0, 0.25)  # e(1/4) = i folded into the prefactor
        assert abs(F2.prefactor - 1j) < 1e-12
        assert len(F2.factors) == 1 and F2.factors[0].coord == 0
        assert abs(F2.value((0.5,)) - F.value((0.25, 0.5))) < 1e-12

    def test_bounded_everywhere(self):
        F = lipschitz_catalog("e(x)*cutoff")
        for u in np.linspace(0, 1, 23, endpoint=False):
            for v in np.linspace(0, 1, 23, endpoint=False):
                assert abs(F.value((u, v))) <= 1 + 1e-12

    def test_json_roundtrip(self):
        F = lipschitz_catalog("e(x)*cutoff").freeze(0, 0.3)
        F2 = LipschitzFunction.from_json(F.to_json())
        assert abs(F2.value((0.7,)) - F.value((0.7,))) < 1e-12


class TestComplexDiam:
    def test_small_exact(self):
        assert complex_diam([1, -1]) == 2.0
        assert complex_diam([1 + 0j]) == 0.0

    def test_hull_path_matches_pairwise(self):
        rng = np.random.default_rng(5)
        vals = rng.normal(size=2000) + 1j * rng.normal(size=2000)
        brute = max(
            abs(a - b) for a in vals[::97] for b in vals[::97]
        )  # subsample lower bound
        d = complex_diam(vals)
        full = 0.0
        for i in range(0, len(vals), 1):
            full = max(full, float(np.max(np.abs(vals[i:] - vals[i]))))
        assert abs(d - full) < 1e-9
        assert d >= brute - 1e-9

    def test_collinear_cloud(self):
        vals = np.linspace(-3, 7, 2000) * (1 + 1j) / math.sqrt(2)
        assert abs(complex_diam(vals) - 10.0) < 1e-9


class TestFactorization:
    def _check_identity(self, Mf, g, P, eta, fac):
        g_loc = g.compose_affine(P.step, P.base - P.step)
        tol = Fraction(1, 2**35)
        for t in range(1, min(P.len, 40) + 1):
            want = tuple(c.eval_real(t) for c in g_loc.coords)
            got = factorization_product(Mf, fac, t)
            assert all(abs(a - b) <= tol for a, b in zip(want, got))

    def test_torus_near_rational(self):
        # alpha = 1/3 + tiny drift: q = 3, smooth remainder
        Mf = Nilmanifold.torus(1)
        alpha = Fraction(1, 3) + Fraction(1, 10**6)
        g = PolySequence.torus_linear([alpha])
        P = Progression(1, 1, 100)
        eta = HorizontalCharacter((1,))
        fac = factorize_polyseq(Mf, g, P, eta)
        assert fac.q == 3
        assert fac.subgroup.dim == 0
        self._check_identity(Mf, g, P, eta, fac)

    def test_torus_smooth_only(self):
        Mf = Nilmanifold.torus(2)
        g = PolySequence.torus_linear([Fraction(1, 2000), Fraction(1, 7)])
        P = Progression(1, 1, 100)
        eta = HorizontalCharacter((1, 0))
        fac = factorize_polyseq(Mf, g, P, eta)
        assert fac.pivot == 0
        assert fac.subgroup.dim == 1
        self._check_identity(Mf, g, P, eta, fac)

    def test_heisenberg_pivot_x(self):
        Mf = Nilmanifold.heisenberg()
        g = PolySequence(
            [
                PolyPhase.monomial([0, Fraction(1, 4) + Fraction(1, 10**5)]),
                PolyPhase.monomial([0, Fraction(2, 7)]),
                PolyPhase.zero(),
            ]
        )
        P = Progression(1, 1, 60)
        eta = HorizontalCharacter((1, 0))
        fac = factorize_polyseq(Mf, g, P, eta)
        assert fac.q == 4
        self._check_identity(Mf, g, P, eta, fac)

    def test_heisenberg_pivot_y(self):
        Mf = Nilmanifold.heisenberg()
        g = PolySequence(
            [
                PolyPhase.monomial([0, Fraction(2, 7)]),
                PolyPhase.monomial([0, Fraction(1, 6) + Fraction(1, 10**5)]),
                PolyPhase.monomial([0, 0, Fraction(1, 3)]),
            ]
        )
        P = Progression(1, 1, 60)
        eta = HorizontalCharacter((0, 1))
        fac = factorize_polyseq(Mf, g, P, eta)
        self._check_identity(Mf, g, P, eta, fac)

    def test_rejects_wild_phase(self):
        Mf = Nilmanifold.torus(1)
        g = PolySequence.torus_linear([SQRT2])
        with pytest.raises(PreconditionError):
            factorize_polyseq(Mf, g, Progression(1, 1, 5000), HorizontalCharacter((1,)))

    def test_rejects_multi_coordinate_character(self):
        Mf = Nilmanifold.torus(2)
        g = PolySequence.torus_linear([Fraction(1, 1000), Fraction(1, 999)])
        with pytest.raises(UnsupportedManifoldError):
            factorize_polyseq(Mf, g, Progression(1, 1, 10), HorizontalCharacter((1, 1)))


class TestReduceDimension:
    def test_torus_two_to_one(self):
        Mf = Nilmanifold.torus(2)
        g = PolySequence.torus_linear([Fraction(1, 8), Fraction(1, 5)])
        F = lipschitz_catalog("e(x)")
        P = Progression(1, 1, 200)
        out = reduce_dimension(Mf, g, F, P, Fraction(1, 4))
        covered = []
        for R, Mf2, h, F2 in out:
            covered.extend(R.elements())
            assert Mf2.dim == 1
            for n in R.elements():
                approx = F2.value((h.coords[0].eval(n),))
                assert abs(nil_eval(Mf, g, F, n) - approx) <= 0.25 + 1e-9
        assert sorted(covered) == P.elements()

    def test_constant_function_single_part(self):
        Mf = Nilmanifold.torus(2)
        g = PolySequence.torus_linear([SQRT2, SQRT3])
        out = reduce_dimension(Mf, g, lipschitz_catalog("const"), Progression(1, 1, 500), 0.1)
        assert len(out) == 1
        assert out[0][1].dim == 0


class TestPartitionNilsequence:
    def test_torus_character_matches_phase_partition(self):
        Mf = Nilmanifold.torus(1)
        g = PolySequence.torus_linear([Fraction(1, 12)])
        F = lipschitz_catalog("e(x)")
        cert = partition_nilsequence(Mf, g, F, Progression(1, 1, 144), 0.2)
        assert verify_certificate(cert)["ok"]
        assert cert.channel == "nilsequence"
        vals = nil_values(Mf, g, F, Progression(1, 1, 144))
        for p, w in zip(cert.parts, cert.diam_witness):
            pv = [vals[n - 1] for n in p.elements()]
            assert complex_diam(pv) <= 0.2 + 1e-9
            assert abs(complex_diam(pv) - w) < 1e-9

    def test_heisenberg_small(self):
        Mf = Nilmanifold.heisenberg()
        g = PolySequence(
            [
                PolyPhase.monomial([0, SQRT2]),
                PolyPhase.monomial([0, SQRT3]),
                PolyPhase.zero(),
            ]
        )
        F = lipschitz_catalog("e(x)*cutoff")
        cert = partition_nilsequence(Mf, g, F, Progression(1, 1, 300), 0.25)
        report = verify_certificate(cert)
        assert report["ok"] and report["max_diam"] <= 0.25
        assert cert.payload["depth"] <= 3

    def test_constant_sequence_single_part(self):
        Mf = Nilmanifold.torus(1)
        g = PolySequence([PolyPhase.constant(Fraction(1, 3))])
        cert = partition_nilsequence(Mf, g, lipschitz_catalog("e(x)"), Progression(1, 1, 1000), 0.1)
        assert cert.num_parts == 1
        assert cert.diam_witness == [0.0]

    def test_epsilon_monotone(self):
        Mf = Nilmanifold.torus(1)
        g = PolySequence.torus_linear([SQRT2])
        F = lipschitz_catalog("e(x)")
        P = Progression(1, 1, 300)
        fine = partition_nilsequence(Mf, g, F, P, 0.15).num_parts
        coarse = partition_nilsequence(Mf, g, F, P, 0.45).num_parts
        assert coarse <= fine

    def test_function_on_unavailable_coordinate(self):
        Mf = Nilmanifold.heisenberg()
        g = PolySequence([PolyPhase.zero()] * 3)
        with pytest.raises(UnsupportedManifoldError):
            partition_nilsequence(Mf, g, lipschitz_catalog("e(z)"), Progression(1, 1, 10), 0.1)

    @given(
        a=st.fractions(min_value=0, max_value=1, max_denominator=24),
        length=st.integers(2, 120),
        eps=st.sampled_from([0.15, 0.3, 0.5]),
    )
    @settings(max_examples=40, deadline=None)
    def test_soundness_torus(self, a, length, eps):
        Mf = Nilmanifold.torus(1)
        g = PolySequence.torus_linear([a])
        F = lipschitz_catalog("e(x)")
        P = Progression(1, 1, length)
        cert = partition_nilsequence(Mf, g, F, P, eps)
        covered = sorted(x for p in cert.parts for x in p.elements())
        assert covered == P.elements()
        assert verify_certificate(cert)["ok"]
