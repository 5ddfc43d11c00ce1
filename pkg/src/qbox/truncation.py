"""Sampling the quantum set in finite projections of probability space.

A projection is a list of coordinates such as ``"a:01"``.  Pure states are
sampled on a grid or at random, optionally mixed, pushed through
:func:`atomic_to_table` and projected.  Each row remembers the atoms that
produced it, so any point can be re-certified later.
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .certifier import VIOLATION, certify
from .qmodel import Atom, AtomicState, atomic_to_table

GRID_SHAPE = (33, 33, 17)
SVG_SIZE = 800


def sample_pure(t0: float, theta: float, lam: float) -> AtomicState:
    """Single pure atom with Bloch vector ``(sin2θ cosλ, sin2θ sinλ, cos2θ)``."""
    if not 0 <= t0 <= 1:
        raise ValueError(f"t0={t0} outside [0, 1]")
    bloch = (np.sin(2 * theta) * np.cos(lam), np.sin(2 * theta) * np.sin(lam), np.cos(2 * theta))
    return AtomicState((Atom(1.0, float(t0), tuple(float(x) for x in bloch)),))


def parse_coord(c: str) -> tuple[str, str]:
    process, _, r = c.partition(":")
    if process not in ("a", "b") or not r or any(x not in "01" for x in r):
        raise ValueError(f"bad coordinate {c!r}; expected e.g. 'a:01'")
    return process, r


@dataclass
class PointCloud:
    coords: list
    rows: np.ndarray
    provenance: list = field(default_factory=list)

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float).reshape(-1, len(self.coords))
        if self.provenance and len(self.provenance) != len(self.rows):
            raise ValueError("provenance must have one entry per row")

    def __len__(self):
        return len(self.rows)

    def column(self, coord: str) -> np.ndarray:
        return self.rows[:, self.coords.index(coord)]

    def state(self, k: int) -> AtomicState:
        """Rebuild the state behind row ``k`` from its provenance."""
        return state_from_provenance(self.provenance[k])


def state_from_provenance(prov) -> AtomicState:
    atoms = []
    for a in prov["atoms"]:
        pure = sample_pure(a["t0"], a["theta"], a["lambda"]).atoms[0]
        atoms.append(Atom(a["w"], pure.t, pure.bloch))
    return AtomicState(tuple(atoms))


def grid_params(shape=GRID_SHAPE):
    """``(t0, θ, λ)`` triples over ``[0,1] x [0,π/2] x [0,π]``, λ varying fastest."""
    nt, nth, nl = shape
    for t0 in np.linspace(0, 1, nt):
        for th in np.linspace(0, np.pi / 2, nth):
            for lam in np.linspace(0, np.pi, nl):
                yield float(t0), float(th), float(lam)


def random_params(rng, count: int):
    t0 = rng.uniform(0, 1, count)
    # uniform on the Bloch sphere: cos2θ uniform in [-1, 1]
    th = np.arccos(rng.uniform(-1, 1, count)) / 2
    lam = rng.uniform(0, 2 * np.pi, count)
    return [(float(a), float(b), float(c)) for a, b, c in zip(t0, th, lam)]


def _threads() -> int:
    n = int(os.environ.get("QBOX_THREADS", "0") or 0)
    return n if n > 0 else (os.cpu_count() or 1)


def _ordered_map(fn, items):
    threads = _threads()
    if threads == 1 or len(items) < 256:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, items, chunksize=64))


def scan(coords, sampler="grid", mixtures: int = 1, seed: int = 0, count: int | None = None,
         grid_shape=GRID_SHAPE) -> PointCloud:
    """Sample states and project their tables onto ``coords``.

    ``sampler`` is ``"grid"`` (every grid point, or the first ``count``) or
    ``"random"`` (``count`` draws from ``seed``).  With ``mixtures = m > 1``
    each row mixes the base pure state with ``m - 1`` further random pure
    states under Dirichlet weights.
    """
    if mixtures < 1:
        raise ValueError("mixtures must be >= 1")
    parsed = [parse_coord(c) for c in coords]
    depth = max(len(r) for _, r in parsed)
    rng = np.random.default_rng(seed)
    if sampler == "grid":
        base = list(grid_params(grid_shape))
        if count is not None:
            base = base[:count]
    elif sampler == "random":
        if count is None:
            raise ValueError("random sampler needs a count")
        base = random_params(rng, count)
    else:
        raise ValueError(f"unknown sampler {sampler!r}")

    samples = []
    for k, params in enumerate(base):
        if mixtures == 1:
            parts = [(1.0, params)]
        else:
            w = rng.dirichlet(np.ones(mixtures))
            w[-1] = 1.0 - w[:-1].sum()
            others = random_params(rng, mixtures - 1)
            parts = list(zip(w.tolist(), [params] + others))
        samples.append({
            "index": k,
            "sampler": sampler,
            "seed": seed,
            "atoms": [{"w": w, "t0": p[0], "theta": p[1], "lambda": p[2]} for w, p in parts],
        })

    cloud = PointCloud(list(coords), np.zeros((0, len(coords))), [])

    def row(prov):
        table = atomic_to_table(state_from_provenance(prov), depth)
        return [table[i, r] for i, r in parsed]

    rows = _ordered_map(row, samples)
    cloud.rows = np.asarray(rows, dtype=float).reshape(-1, len(coords))
    cloud.provenance = samples
    return cloud


@dataclass
class RecertifyReport:
    checked: int
    violations: list
    statuses: dict

    @property
    def ok(self) -> bool:
        return not self.violations


def recertify(cloud: PointCloud, depth: int | None = None, tol: float = 1e-9, K=None) -> RecertifyReport:
    """Certify the full table behind every row; a sound sampler never yields VIOLATION."""
    if depth is None:
        depth = max(2, max(len(parse_coord(c)[1]) for c in cloud.coords))

    def one(k):
        return certify(atomic_to_table(cloud.state(k), depth), tol, K).status

    statuses = _ordered_map(one, list(range(len(cloud))))
    counts: dict = {}
    for s in statuses:
        counts[s] = counts.get(s, 0) + 1
    bad = [k for k, s in enumerate(statuses) if s == VIOLATION]
    return RecertifyReport(len(statuses), bad, counts)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def hull2d(points) -> np.ndarray:
    """Convex hull by the monotone chain; counterclockwise, collinear points dropped."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"hull2d needs two-dimensional points, got shape {pts.shape}")
    if len(pts) == 0:
        raise ValueError("hull2d needs at least one point")
    pts = sorted(set(map(tuple, pts.tolist())))
    if len(pts) <= 2:
        return np.array(pts)

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower, upper = chain(pts), chain(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        hull = hull[:1]
    return np.array(hull)


def _fmt(v: float) -> str:
    return repr(float(v))


def to_csv(cloud: PointCloud) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cloud.coords)
    for row in cloud.rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue().encode()


def from_csv(data) -> PointCloud:
    if isinstance(data, bytes):
        data = data.decode()
    reader = csv.reader(io.StringIO(data))
    header = next(reader)
    for c in header:
        parse_coord(c)
    rows = [[float(v) for v in line] for line in reader if line]
    return PointCloud(header, np.array(rows).reshape(-1, len(header)))


def to_svg(cloud: PointCloud, hull=None, axes=(0, 1)) -> bytes:
    """Scatter of two coordinates over the unit square, with an optional hull outline."""
    if len(cloud.coords) < 2:
        raise ValueError("an SVG scatter needs at least two coordinates")
    margin = 60
    span = SVG_SIZE - 2 * margin

    def xy(p):
        return margin + p[0] * span, SVG_SIZE - margin - p[1] * span

    ix, iy = axes
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" '
        f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" fill="none" stroke="black"/>',
        f'<text x="{SVG_SIZE / 2}" y="{SVG_SIZE - 20}" text-anchor="middle">{cloud.coords[ix]}</text>',
        f'<text x="20" y="{SVG_SIZE / 2}" transform="rotate(-90 20 {SVG_SIZE / 2})" '
        f'text-anchor="middle">{cloud.coords[iy]}</text>',
    ]
    for label, v in (("0", 0.0), ("1", 1.0)):
        x, y = xy((v, v))
        parts.append(f'<text x="{x:.2f}" y="{SVG_SIZE - margin + 18}" text-anchor="middle">{label}</text>')
        parts.append(f'<text x="{margin - 10}" y="{y:.2f}" text-anchor="end">{label}</text>')
    for row in cloud.rows:
        x, y = xy((row[ix], row[iy]))
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="1.5" fill="steelblue" fill-opacity="0.5"/>')
    if hull is not None and len(hull):
        pts = [xy(p) for p in hull] + [xy(hull[0])]
        path = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        parts.append(f'<polyline points="{path}" fill="none" stroke="crimson" stroke-width="2"/>')
    parts.append("</svg>")
    return ("\n".join(parts) + "\n").encode()


def emit(cloud: PointCloud, hull=None, format: str = "csv", path=None) -> bytes:
    """Render a cloud as CSV (canonical) or SVG; writes to ``path`` if given."""
    if format == "csv":
        data = to_csv(cloud)
    elif format == "svg":
        data = to_svg(cloud, hull)
    else:
        raise ValueError(f"unknown format {format!r}")
    if path is not None:
        with open(path, "wb") as fh:
            fh.write(data)
    return data
