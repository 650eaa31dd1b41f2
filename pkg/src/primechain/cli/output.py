"""Plain-text report helpers shared by the commands."""

from collections.abc import Sequence

from primechain.domain.bigreal import decimal_text, digit_count
from primechain.domain.models import PrimeStatus

VALUE_WIDTH = 48


def short(value: int, width: int = VALUE_WIDTH) -> str:
    """Decimal text of ``value``, elided in the middle when longer than ``width``."""
    text = decimal_text(value)
    if len(text) <= width:
        return text
    keep = (width - 3) // 2
    return f"{text[:keep]}...{text[-keep:]}"


def term_line(index: int, value: int, status: PrimeStatus, verdict: str = "") -> str:
    return f"{index:>5}  {digit_count(value):>6}d  {status.value:<14}  {verdict:<4}  {short(value)}"


def term_header() -> str:
    return f"{'index':>5}  {'digits':>7}  {'status':<14}  {'':<4}  value"


def print_terms(rows: Sequence[tuple[int, int, PrimeStatus]]) -> None:
    print(term_header())
    for index, value, status in rows:
        print(term_line(index, value, status))
