"""Collects one verdict per acceptance criterion across several tests."""
from collections import OrderedDict

_RESULTS = OrderedDict()


def record(key, title, ok, detail):
    """Add a sub-check to criterion ``key``; the criterion passes if all do."""
    entry = _RESULTS.setdefault(key, {"title": title, "checks": []})
    entry["checks"].append((bool(ok), detail))
    return ok


def lines():
    out = []
    for key, entry in _RESULTS.items():
        ok = all(c[0] for c in entry["checks"])
        detail = "; ".join(d if good else f"{d} [failed]" for good, d in entry["checks"])
        out.append(f"{'PASS' if ok else 'FAIL'} {key} {entry['title']}: {detail}")
    return out
