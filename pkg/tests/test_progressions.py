import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apinc.errors import IntegerRangeError, InvalidArgumentError
from apinc.progressions import (
    AffineMap,
    PartitionCertificate,
    Progression,
    rescale_map,
    subdivide,
)


class TestProgression:
    def test_elements_and_len(self):
        P = Progression(1, 1, 10)
        assert P.elements() == list(range(1, 11))
        assert len(P) == 10
        assert P.last == 10

    def test_negative_step(self):
        P = Progression(7, -2, 4)
        assert P.elements() == [7, 5, 3, 1]
        assert 3 in P and 2 not in P

    def test_distinctness(self):
        P = Progression(5, 3, 7)
        assert len(set(P.elements())) == 7

    def test_invalid(self):
        with pytest.raises(InvalidArgumentError):
            Progression(0, 1, 0)
        with pytest.raises(InvalidArgumentError):
            Progression(0, 0, 5)

    def test_overflow_reported(self):
        with pytest.raises(IntegerRangeError):
            Progression(2**62, 2**62, 4)

    def test_json_roundtrip(self):
        P = Progression(3, 5, 4)
        assert Progression.from_json(P.to_json()) == P


class TestSubdivide:
    def test_mod2_blocks_of_3(self):
        # residue class {1,3,5,7,9} splits {1,3,5},{7,9}; evens likewise
        parts = subdivide(Progression(1, 1, 10), 2, 3)
        got = sorted(tuple(p.elements()) for p in parts)
        assert got == [(1, 3, 5), (2, 4, 6), (7, 9), (8, 10)]

    def test_identity_case(self):
        P = Progression(0, 1, 6)
        assert subdivide(P, 1, 6) == [P]

    def test_three_classes_step9(self):
        parts = subdivide(Progression(5, 3, 7), 3, 2)
        # residue classes have lengths 3, 2, 2; blocks of <= 2 give 2+1+1
        assert len(parts) == 4
        assert all(p.step == 9 for p in parts)
        assert all(p.len <= 2 for p in parts)
        all_elems = sorted(x for p in parts for x in p.elements())
        assert all_elems == Progression(5, 3, 7).elements()

    def test_invalid_args(self):
        P = Progression(1, 1, 10)
        with pytest.raises(InvalidArgumentError):
            subdivide(P, 0, 3)
        with pytest.raises(InvalidArgumentError):
            subdivide(P, 2, 0)
        with pytest.raises(InvalidArgumentError):
            subdivide(P, 11, 1)

    @given(
        base=st.integers(-1000, 1000),
        step=st.integers(-20, 20).filter(lambda s: s != 0),
        length=st.integers(1, 400),
        mult=st.integers(1, 30),
        block=st.integers(1, 50),
    )
    @settings(max_examples=200, deadline=None)
    def test_exact_cover_multiset(self, base, step, length, mult, block):
        P = Progression(base, step, length)
        if mult > length:
            with pytest.raises(InvalidArgumentError):
                subdivide(P, mult, block)
            return
        parts = subdivide(P, mult, block)
        concat = sorted(x for p in parts for x in p.elements())
        assert concat == sorted(P.elements())
        assert all(p.step == step * mult for p in parts)
        assert all(1 <= p.len <= block for p in parts)


class TestRescale:
    def test_identity_shift(self):
        m = rescale_map(Progression(0, 1, 50))
        assert [m(i) for i in range(5)] == [0, 1, 2, 3, 4]

    def test_negative(self):
        m = rescale_map(Progression(7, -2, 4))
        assert m(3) == 1

    def test_inverse(self):
        m = rescale_map(Progression(3, 5, 4))
        assert [m(i) for i in range(4)] == [3, 8, 13, 18]
        assert m.inverse(13) == 2
        with pytest.raises(InvalidArgumentError):
            m.inverse(14)

    @given(
        base=st.integers(-10**6, 10**6),
        step=st.integers(-100, 100).filter(lambda s: s != 0),
        length=st.integers(1, 1000),
    )
    @settings(max_examples=200, deadline=None)
    def test_roundtrip(self, base, step, length):
        m = rescale_map(Progression(base, step, length))
        for i in (0, length // 2, length - 1):
            assert m.inverse(m(i)) == i


class TestCertificateType:
    def test_min_len_auto(self):
        parts = [Progression(1, 1, 3), Progression(4, 1, 2)]
        c = PartitionCertificate(
            source=Progression(1, 1, 5), parts=parts, epsilon=0.1, diam_witness=[0, 0]
        )
        assert c.min_len == 2
        assert c.num_parts == 2

    def test_witness_count_checked(self):
        with pytest.raises(InvalidArgumentError):
            PartitionCertificate(
                source=Progression(1, 1, 2),
                parts=[Progression(1, 1, 2)],
                epsilon=0.1,
                diam_witness=[],
            )

    def test_json_roundtrip(self):
        c = PartitionCertificate(
            source=Progression(1, 1, 5),
            parts=[Progression(1, 1, 3), Progression(4, 1, 2)],
            epsilon=0.25,
            diam_witness=[0.0, 0.125],
            payload={"phase": {"basis": "binomial", "coeffs": ["0/1"], "exact": True}},
        )
        c2 = PartitionCertificate.from_json(c.to_json())
        assert c2.parts == c.parts
        assert c2.diam_witness == c.diam_witness
        assert c2.epsilon == c.epsilon


def test_affine_map_call():
    m = AffineMap(7, -2, 4)
    assert [m(i) for i in range(4)] == [7, 5, 3, 1]
