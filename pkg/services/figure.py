"""Figure data: labeled I, J and K intervals per address, for external plotting."""

from typing import List, Tuple

from construction.addresses import Address, iter_addresses
from construction.removals import j_pair, k_interval, removal_pair
from core.intervals import Interval
from core.output import csv_text
from core.rationals import format_rational

FIGURE_HEADER = ("addr", "kind", "lo", "hi")


def address_label(addr: Address) -> str:
    return ".".join(str(n) for n in addr.indices)


def figure_intervals(addr: Address) -> List[Tuple[str, Interval]]:
    pair = removal_pair(addr)
    j_left, j_right = j_pair(addr)
    return [
        ("IL", pair.left),
        ("IR", pair.right),
        ("JL", j_left),
        ("JR", j_right),
        ("K", k_interval(addr)),
    ]


def figure_rows(depth: int, index_cap: int) -> List[Tuple[str, str, str, str]]:
    """Rows for every address up to ``depth`` with indices <= ``index_cap``.

    Addresses come depth-major, value-descending; depth 0 gives no rows.
    """
    rows = []
    if depth < 1:
        return rows
    for addr in iter_addresses(depth, index_cap):
        label = address_label(addr)
        for kind, interval in figure_intervals(addr):
            rows.append((label, kind, format_rational(interval.lo), format_rational(interval.hi)))
    return rows


def figure_csv(depth: int, index_cap: int) -> str:
    return csv_text(FIGURE_HEADER, figure_rows(depth, index_cap))
