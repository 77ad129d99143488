"""Compute the requested arrival-time densities for a scenario."""
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from ._backend import BACKEND
from .intensity import intensity_trace
from .toa import (expected_form, exponential_density, flux_trace, peak_analysis,
                  semiclassical_step, semiclassical_support, semiclassical_trace)
from .wavetrain import no_spreading_margin

COLUMNS = ("qf", "sc", "w", "ms", "jn", "expected")
EXPONENTIAL = ("w", "ms", "jn")
LABELS = {
    "qf": "quantum flux",
    "sc": "semiclassical",
    "w": "Wlodarz",
    "ms": "Marchewka-Schuss",
    "jn": "Jurman-Nikolic",
    "expected": "expected form",
}


@dataclass
class ResultTable:
    """Column-oriented result: ``tau`` plus one density per requested distribution."""

    columns: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if "tau" not in self.columns:
            raise ValueError("a result table needs a tau column")
        n = len(self.columns["tau"])
        for name, col in self.columns.items():
            if len(col) != n:
                raise ValueError(f"column {name} has {len(col)} rows, expected {n}")

    @property
    def names(self):
        """Distribution columns in canonical order."""
        return [c for c in COLUMNS if c in self.columns]


def parse_which(text):
    items = [w.strip() for w in text.split(",") if w.strip()]
    bad = [w for w in items if w not in COLUMNS]
    if bad:
        raise ValueError(f"unknown distributions: {', '.join(bad)}")
    if not items:
        raise ValueError("no distributions requested")
    return set(items)


def _peaks_or_none(d, tau0, N):
    try:
        return [p._asdict() for p in peak_analysis(d, tau0, N)]
    except ValueError as exc:
        return {"error": str(exc)}


def run(config, which=COLUMNS):
    """Tabulate each requested density on the scenario's time grid.

    Raises ``ConfigError`` only for invalid or under-resolved input; physics
    oddities (backflow, overlapping peaks, flat windows) are recorded in the
    metadata instead.
    """
    which = set(which)
    bad = which - set(COLUMNS)
    if bad or not which:
        raise ValueError(f"unknown or empty distribution set: {sorted(bad)}")
    config.check_resolution()
    cfg = config.resolved()
    tp, det, grid = cfg.train(), cfg.detector(), cfg.grid()
    notes = []
    cols = {"tau": grid.times}
    meta = {
        "version": __version__,
        "backend": BACKEND,
        "config": cfg.to_dict(),
        "tau0": tp.tau0,
        "no_spreading_margin": no_spreading_margin(tp),
        "p_nondetect": {},
        "peaks": {},
        "backflow": {},
    }
    densities = {}
    if "qf" in which:
        densities["qf"] = flux_trace(tp, grid)
    if "sc" in which:
        if grid.dt > 2 * semiclassical_step(tp, semiclassical_support(tp)[0]):
            notes.append("time step too coarse to resolve the semiclassical comb; the sc column is aliased")
        densities["sc"] = semiclassical_trace(tp, grid)
    for kind in EXPONENTIAL:
        if kind in which:
            densities[kind] = exponential_density(intensity_trace(kind, tp, det, grid))
    if "expected" in which:
        single = flux_trace(tp.single(), grid)
        try:
            densities["expected"] = expected_form(single, tp.N, tp.tau0)
        except ValueError as exc:
            notes.append(f"expected form unavailable: {exc}")
    for name in COLUMNS:
        if name not in densities:
            continue
        d = densities[name]
        cols[name] = d.pi
        meta["p_nondetect"][name] = d.p_nondetect
        meta["backflow"][name] = d.backflow
        meta["peaks"][name] = _peaks_or_none(d, tp.tau0, tp.N)
    meta["notes"] = notes
    for n in notes:
        warnings.warn(n, stacklevel=2)
    return ResultTable(cols, meta)


def peak_table(table):
    """Rows (distribution, k, location, height) for printing."""
    rows = []
    for name in table.names:
        peaks = table.metadata["peaks"].get(name)
        if isinstance(peaks, list):
            for p in peaks:
                rows.append((name, p["k"], p["location"], p["height"]))
    return rows


def summary_lines(table):
    meta = table.metadata
    out = [f"tau0 = {meta['tau0']:.6g}, no-spreading margin = {meta['no_spreading_margin']:.3g}"]
    for name in table.names:
        out.append(f"{name:>8s}  P(inf) = {meta['p_nondetect'][name]:.6g}"
                   + ("  [backflow]" if meta["backflow"][name] else ""))
    by_name = {}
    for name, k, loc, h in peak_table(table):
        by_name.setdefault(name, []).append(h)
    for name, hs in by_name.items():
        hs = np.asarray(hs)
        if hs.size > 1 and np.all(hs[:-1] > 0):
            r = hs[1:] / hs[:-1]
            out.append(f"{name:>8s}  peak ratios h(k+1)/h(k) in [{r.min():.4f}, {r.max():.4f}]")
    return out
