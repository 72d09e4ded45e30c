import re

_DIGITS = re.compile(r"(\d+)")


def natural_key(name: str) -> list:
    """Sort key that orders embedded integers numerically (``SP2 < SP10``)."""
    return [int(tok) if tok.isdigit() else tok for tok in _DIGITS.split(str(name))]


def sorted_ids(ids) -> list:
    return sorted(ids, key=natural_key)


def set_key(members) -> list:
    return [natural_key(m) for m in sorted_ids(members)]


def canonical_key(members) -> tuple:
    """Cardinality first, then lexicographic over the naturally sorted members."""
    return (len(members), set_key(members))
