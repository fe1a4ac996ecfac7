from __future__ import annotations

from typing import List, Optional

from src.services.errors import SearchError, UsageError
from src.services.statevector import MarkedSet, check_register_size


def parse_index_list(text: str, limit: Optional[int] = None) -> List[int]:
    """
    Parses an explicit item list such as "1,3,5" or "0, 2-4".

    Ranges are inclusive on both ends. Blank entries are skipped, so a trailing
    comma is harmless. With `limit`, a range reaching `limit` or beyond is
    rejected before it is expanded.
    """
    out: List[int] = []
    for raw in text.split(","):
        part = raw.strip()
        if not part:
            continue
        if "-" in part[1:]:
            left, right = part.split("-", 1)
            try:
                lo, hi = int(left), int(right)
            except ValueError:
                raise UsageError(f"bad item range {part!r}") from None
            if lo > hi:
                raise UsageError(f"empty item range {part!r}")
            if limit is not None and (lo < 0 or hi >= limit):
                raise UsageError(f"item range {part!r} leaves [0, {limit - 1}]")
            out.extend(range(lo, hi + 1))
            continue
        try:
            out.append(int(part))
        except ValueError:
            raise UsageError(f"bad item index {part!r}") from None
    return out


def parse_marked_spec(text: str, n: int, seed: int = 0) -> MarkedSet:
    """
    Builds the marked set from its command-line form:

    - "all" marks every item;
    - "none" marks nothing (the simulator accepts M = 0);
    - "random:K" marks K distinct items placed with the given seed;
    - anything else is an explicit index list (see `parse_index_list`).
    """
    spec = text.strip().lower()
    if not spec:
        raise UsageError("marked-set spec is empty")
    try:
        if spec == "all":
            return MarkedSet.all_items(n)
        if spec == "none":
            return MarkedSet(n=n)
        if spec.startswith("random:"):
            count = spec.split(":", 1)[1].strip()
            if not count.isdigit():
                raise UsageError(f"bad marked count {count!r} in {text!r}")
            return MarkedSet.random(n, int(count), seed)
        return MarkedSet.from_indices(n, parse_index_list(spec, limit=2 ** check_register_size(n)))
    except UsageError:
        raise
    except SearchError as e:
        raise UsageError(f"marked-set spec {text!r}: {e}") from e


def parse_iterations(text: str) -> Optional[int]:
    """Returns the iteration count, or None for "auto" (use the required count)."""
    spec = text.strip().lower()
    if spec == "auto":
        return None
    try:
        q = int(spec)
    except ValueError:
        raise UsageError(f"iteration count must be an integer or 'auto', got {text!r}") from None
    if q < 0:
        raise UsageError(f"iteration count must be non-negative, got {q}")
    return q
