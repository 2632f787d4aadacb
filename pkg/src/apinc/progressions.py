"""Integer arithmetic progressions, subdivision and affine rescaling.

A progression is the triple (base, step, len) with elements
base + i*step for 0 <= i < len.  All element arithmetic is checked
against a signed 64-bit range: Python integers never wrap, but a
certificate whose elements silently left the machine-word range would
not be checkable by external tools, so we reject it up front.
"""

from dataclasses import dataclass, field

from .errors import IntegerRangeError, InvalidArgumentError

INT_BOUND = 2**63


def _check_range(*xs):
    for x in xs:
        if not -INT_BOUND <= x < INT_BOUND:
            raise IntegerRangeError(f"integer {x} outside the checked 64-bit range")


@dataclass(frozen=True)
class Progression:
    base: int
    step: int
    len: int

    def __post_init__(self):
        if self.len < 1:
            raise InvalidArgumentError(f"len must be >= 1, got {self.len}")
        if self.step == 0:
            raise InvalidArgumentError("step must be nonzero")
        _check_range(self.base, self.step, self.last)

    @property
    def last(self):
        return self.base + (self.len - 1) * self.step

    def __len__(self):
        return self.len

    def __getitem__(self, i):
        if not 0 <= i < self.len:
            raise IndexError(i)
        return self.base + i * self.step

    def elements(self):
        """All elements in index order."""
        return [self.base + i * self.step for i in range(self.len)]

    def element_set(self):
        return frozenset(self.elements())

    def __contains__(self, x):
        q, r = divmod(x - self.base, self.step)
        return r == 0 and 0 <= q < self.len

    def to_json(self):
        return {"base": self.base, "step": self.step, "len": self.len}

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["base"]), int(obj["step"]), int(obj["len"]))

    @classmethod
    def interval(cls, lo, hi):
        """The progression [lo..hi] with step 1."""
        if hi < lo:
            raise InvalidArgumentError(f"empty interval {lo}..{hi}")
        return cls(lo, 1, hi - lo + 1)


@dataclass
class PartitionCertificate:
    """Disjoint progression parts covering `source`, with per-part
    exhaustively computed diameter witnesses.

    Invariants (re-checked by the independent verifier in `oracle`):
      * parts are pairwise disjoint and their union is `source`;
      * every diam witness <= epsilon;
      * every part length >= min_len.
    """

    source: Progression
    parts: list
    epsilon: float
    diam_witness: list
    min_len: int = field(default=0)
    channel: str = "polyphase"
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.parts) != len(self.diam_witness):
            raise InvalidArgumentError("one diameter witness per part required")
        if not self.min_len:
            self.min_len = min(p.len for p in self.parts)

    @property
    def num_parts(self):
        return len(self.parts)

    def to_json(self):
        return {
            "channel": self.channel,
            "source": self.source.to_json(),
            "epsilon": float(self.epsilon),
            "min_len": self.min_len,
            "parts": [
                dict(p.to_json(), diam=float(w))
                for p, w in zip(self.parts, self.diam_witness)
            ],
            "payload": self.payload,
        }

    @classmethod
    def from_json(cls, obj):
        parts = [Progression.from_json(p) for p in obj["parts"]]
        return cls(
            source=Progression.from_json(obj["source"]),
            parts=parts,
            epsilon=float(obj["epsilon"]),
            diam_witness=[float(p["diam"]) for p in obj["parts"]],
            min_len=int(obj["min_len"]),
            channel=obj.get("channel", "polyphase"),
            payload=obj.get("payload", {}),
        )


def subdivide(P, mult, block):
    """Split P into progressions of common difference step(P)*mult.

    Each residue class i mod mult is chopped into consecutive blocks of
    length `block`, the trailing remainder (if any) becoming a shorter
    final block of the same class; classes are never merged.  The output
    is pairwise disjoint, covers P exactly, and uses the minimal number
    of parts for the given (mult, block).
    """
    if mult < 1 or block < 1:
        raise InvalidArgumentError(f"mult and block must be positive, got {mult}, {block}")
    if mult > P.len:
        raise InvalidArgumentError(f"mult {mult} exceeds progression length {P.len}")
    parts = []
    for r in range(mult):
        class_len = (P.len - r + mult - 1) // mult
        if class_len <= 0:
            continue
        t = 0
        while t < class_len:
            ln = min(block, class_len - t)
            parts.append(Progression(P.base + (r + t * mult) * P.step, P.step * mult, ln))
            t += ln
    return parts


@dataclass(frozen=True)
class AffineMap:
    """The bijection i -> base + i*step from [0, len) onto elements(P)."""

    base: int
    step: int
    len: int

    def __call__(self, i):
        return self.base + i * self.step

    def inverse(self, x):
        q, r = divmod(x - self.base, self.step)
        if r != 0 or not 0 <= q < self.len:
            raise InvalidArgumentError(f"{x} is not an element of the progression")
        return q


def rescale_map(P):
    """Affine map identifying [0, len(P)) with the elements of P."""
    return AffineMap(P.base, P.step, P.len)
