"""Address algebra for the accumulation points a(n1,...,nk) and gaps r(n1,...,nk).

Depth one: a(n) = 2^-n. Deeper points follow the recursion

    a(n1,...,nk,n) = a(n1,...,nk + 1) + 2^-(n+3) * r(n1,...,nk)
    r(n1,...,nk)   = a(n1,...,nk) - a(n1,...,nk + 1)

which gives the closed form r(n1,...,nk) = 2^-(n1+1) * prod_{i>=2} 2^-(ni+4).
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, List, Optional, Sequence, Tuple

from core.exceptions import AddressError
from core.rationals import power_of_two


@dataclass(frozen=True)
class Address:
    """Finite non-empty sequence of positive integers."""

    indices: Tuple[int, ...]

    def __post_init__(self) -> None:
        indices = tuple(self.indices)
        if not indices:
            raise AddressError("Address must be non-empty")
        for n in indices:
            if isinstance(n, bool) or not isinstance(n, int) or n < 1:
                raise AddressError(f"Address indices must be positive integers, got {n!r}")
        object.__setattr__(self, "indices", indices)

    @classmethod
    def of(cls, *indices: int) -> "Address":
        return cls(tuple(indices))

    @classmethod
    def ones(cls, depth: int) -> "Address":
        return cls((1,) * depth)

    @classmethod
    def from_json(cls, data: Sequence[int]) -> "Address":
        return cls(tuple(int(n) for n in data))

    def to_json(self) -> List[int]:
        return list(self.indices)

    @property
    def depth(self) -> int:
        return len(self.indices)

    @property
    def last(self) -> int:
        return self.indices[-1]

    @property
    def prefix(self) -> Optional["Address"]:
        """The parent address, or None at depth one."""
        if len(self.indices) == 1:
            return None
        return Address(self.indices[:-1])

    def with_last(self, n: int) -> "Address":
        return Address(self.indices[:-1] + (n,))

    def extend(self, tail: Sequence[int]) -> "Address":
        return Address(self.indices + tuple(tail))

    def is_child_of(self, other: "Address") -> bool:
        return self.depth == other.depth + 1 and self.indices[:-1] == other.indices

    def __str__(self) -> str:
        return "(" + ",".join(str(n) for n in self.indices) + ")"


def parent_successor(addr: Address) -> Address:
    """(n1,...,nk) -> (n1,...,nk + 1)."""
    return addr.with_last(addr.last + 1)


def child(addr: Optional[Address], n: int) -> Address:
    """Append index ``n``; ``addr=None`` stands for the root and yields (n)."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise AddressError(f"Child index must be a positive integer, got {n!r}")
    if addr is None:
        return Address((n,))
    return Address(addr.indices + (n,))


def r_value(addr: Address) -> Fraction:
    """Gap length by closed form."""
    exponent = addr.indices[0] + 1
    for n in addr.indices[1:]:
        exponent += n + 4
    return power_of_two(-exponent)


@lru_cache(maxsize=65536)
def _a_value(indices: Tuple[int, ...]) -> Fraction:
    if len(indices) == 1:
        return power_of_two(-indices[0])
    parent = indices[:-1]
    successor = parent[:-1] + (parent[-1] + 1,)
    return _a_value(successor) + power_of_two(-(indices[-1] + 3)) * r_value(Address(parent))


def a_value(addr: Address) -> Fraction:
    """Exact point a(addr) by the defining recursion."""
    return _a_value(addr.indices)


def r_value_by_recursion(addr: Address) -> Fraction:
    """Gap length straight from its definition a(addr) - a(successor)."""
    return a_value(addr) - a_value(parent_successor(addr))


@dataclass(frozen=True)
class AddressValue:
    """The point a(addr), its gap r(addr) and the depth, checked on creation."""

    a: Fraction
    r: Fraction
    k: int

    def __post_init__(self) -> None:
        if not 0 < self.a <= Fraction(1, 2):
            raise AddressError(f"a = {self.a} outside (0, 1/2]")
        if self.r <= 0:
            raise AddressError(f"r = {self.r} must be positive")


def address_value(addr: Address) -> AddressValue:
    """a, r and depth together; r is taken from the recursion and must match the closed form."""
    r = r_value_by_recursion(addr)
    if r != r_value(addr):
        raise AddressError(f"Gap recursion {r} disagrees with closed form {r_value(addr)} at {addr}")
    return AddressValue(a=a_value(addr), r=r, k=addr.depth)


def value_order_key(addr: Address) -> Tuple[int, Fraction]:
    """Depth-major, value-descending ordering key."""
    return (addr.depth, -a_value(addr))


def iter_addresses(max_depth: int, max_index: int) -> Iterator[Address]:
    """All addresses with depth <= max_depth and indices <= max_index.

    Yields in depth-major, value-descending order.
    """
    level: List[Address] = [Address((n,)) for n in range(1, max_index + 1)]
    depth = 1
    while level and depth <= max_depth:
        for addr in sorted(level, key=value_order_key):
            yield addr
        level = [child(addr, n) for addr in level for n in range(1, max_index + 1)]
        depth += 1
