"""Entropy sweeps over parameter rectangles, their files, projections and isentrope components."""

from __future__ import annotations

import hashlib
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .entropy import METHOD_OF_CODE, STATUS_OF_CODE, EntropyConfig, entropy_batch
from .exceptions import ConfigurationError
from .qmap import LOG2, project
from .regions import REGION_CODES, FamilyDomain, classify_codes, family_masks

CSV_HEADER = "mu,t,sigma1,sigma2,region,entropy,entropy_err,method,depth,status"

PRESET_DOMAINS: dict[str, tuple[float, float, float, float]] = {
    "U1": (0.0, 8.0, 0.0, 3.0),
    "U2": (-7.0, 0.0, -7.0, 0.0),
    "U3": (-50.0, 0.0, -20.0, 0.0),
}

# fixed colours in band order, then the reserved classes
PALETTE = {
    "black": (0, 0, 0),
    "blue": (0, 0, 255),
    "magenta": (255, 0, 255),
    "green": (0, 255, 0),
    "cyan": (0, 255, 255),
    "yellow": (255, 255, 0),
    "red": (255, 0, 0),
}
COLOUR_ORDER = ("black", "blue", "magenta", "green", "cyan", "yellow", "red")
FAILURE_RGB = (0, 0, 0)
UNCONVERGED_RGB = (128, 128, 128)
FAILURE = -1
UNCONVERGED = -2

_REGION_TOKENS = tuple(r.value for r in REGION_CODES)
_METHOD_TOKENS = tuple(m.value for m in METHOD_OF_CODE)
_STATUS_TOKENS = tuple(s.value for s in STATUS_OF_CODE)


def parse_domain(text: str) -> tuple[float, float, float, float]:
    """``U1``/``U2``/``U3`` presets or ``rect:mu0,mu1,t0,t1``; the rectangle must sit in one valid quadrant."""
    if text in PRESET_DOMAINS:
        return PRESET_DOMAINS[text]
    if not text.startswith("rect:"):
        raise ConfigurationError(f"unknown domain {text!r}")
    try:
        vals = tuple(float(v) for v in text[5:].split(","))
    except ValueError as exc:
        raise ConfigurationError(f"bad rectangle {text!r}") from exc
    if len(vals) != 4:
        raise ConfigurationError("rectangle needs four numbers mu0,mu1,t0,t1")
    check_window(vals)
    return vals  # type: ignore[return-value]


def check_window(w: tuple[float, ...]) -> None:
    mu0, mu1, t0, t1 = w
    if not all(math.isfinite(v) for v in w) or mu0 >= mu1 or t0 >= t1:
        raise ConfigurationError(f"empty or invalid rectangle {w}")
    first = mu0 >= 0 and t0 >= 0
    third = mu1 <= 0 and t1 <= 0
    if not (first or third):
        raise ConfigurationError("rectangle must lie in the first or third quadrant")


def parse_resolution(text: str) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError as exc:
        raise ConfigurationError(f"bad resolution {text!r}") from exc
    if w < 1 or h < 1:
        raise ConfigurationError("resolution must be positive")
    return w, h


@dataclass(frozen=True)
class BandSpec:
    """Half-open bands ``[e_k, e_{k+1})`` covering ``[0, log 2]``; the last band is closed."""

    name: str
    edges: tuple[float, ...]

    def __post_init__(self) -> None:
        e = self.edges
        if len(e) < 2 or e[0] != 0.0 or e[-1] != LOG2 or any(a >= b for a, b in zip(e, e[1:])):
            raise ConfigurationError(f"band edges must increase from 0 to log 2: {e}")
        if len(e) - 1 > len(COLOUR_ORDER):
            raise ConfigurationError("at most seven bands are supported")

    @property
    def n_bands(self) -> int:
        return len(self.edges) - 1

    def labels(self) -> list[str]:
        e = self.edges
        out = [f"[{a:.4g},{b:.4g})" for a, b in zip(e[:-2], e[1:-1])]
        out.append(f"[{e[-2]:.4g},log2]")
        return out

    def colours(self) -> list[tuple[int, int, int]]:
        # fig9 starts at blue; black is kept for failed cells
        names = COLOUR_ORDER if self.name != "fig9" else COLOUR_ORDER[1:]
        return [PALETTE[n] for n in names[: self.n_bands]]

    def assign(self, value: np.ndarray, status: np.ndarray) -> np.ndarray:
        """Band index per cell; FAILURE for failed cells, UNCONVERGED for max-depth cells."""
        inner = np.asarray(self.edges[1:-1])
        v = np.nan_to_num(np.asarray(value, dtype=float), nan=0.0)
        idx = np.searchsorted(inner, v, side="right")
        idx = np.clip(idx, 0, self.n_bands - 1)
        idx = np.where(status == 1, UNCONVERGED, idx)
        return np.where(status == 2, FAILURE, idx)


FIG6 = BandSpec("fig6", (0.0, 0.1, 0.25, 0.4, 0.48, 0.55, 0.65, LOG2))
FIG9 = BandSpec("fig9", (0.0, 0.05, 0.2, 0.3, 0.5, 0.66, LOG2))


def parse_bands(text: str) -> BandSpec:
    if text == "fig6":
        return FIG6
    if text == "fig9":
        return FIG9
    if text.startswith("custom:"):
        try:
            vals = [float(v) for v in text[7:].split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigurationError(f"bad band list {text!r}") from exc
        inner = [v for v in vals if 0.0 < v < LOG2]
        if len(inner) != len([v for v in vals if v not in (0.0, LOG2)]):
            raise ConfigurationError("custom band edges must lie in (0, log 2)")
        return BandSpec("custom", tuple([0.0, *inner, LOG2]))
    raise ConfigurationError(f"unknown band spec {text!r}")


@dataclass
class SweepGrid:
    """Per-cell records on a ``height x width`` grid, stored row-major (row j has t index j)."""

    window: tuple[float, float, float, float]
    width: int
    height: int
    mu: np.ndarray
    t: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray
    region: np.ndarray
    entropy: np.ndarray
    error: np.ndarray
    method: np.ndarray
    depth: np.ndarray
    status: np.ndarray
    rows_done: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def complete(self) -> bool:
        return bool(self.rows_done.all())

    def as_image(self, arr: np.ndarray) -> np.ndarray:
        return np.asarray(arr).reshape(self.height, self.width)


def cell_centres(window: tuple[float, float, float, float], width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    """Flat row-major centres ``(mu0 + (i + 1/2) dmu, t0 + (j + 1/2) dt)``."""
    mu0, mu1, t0, t1 = window
    mus = mu0 + (np.arange(width) + 0.5) * ((mu1 - mu0) / width)
    ts = t0 + (np.arange(height) + 0.5) * ((t1 - t0) / height)
    return np.tile(mus, height), np.repeat(ts, width)


def _fmt(x: float) -> str:
    return repr(float(x))


def _row_lines(g: SweepGrid, j: int) -> list[str]:
    lines = []
    for k in range(j * g.width, (j + 1) * g.width):
        lines.append(
            ",".join(
                (
                    _fmt(g.mu[k]), _fmt(g.t[k]), _fmt(g.sigma1[k]), _fmt(g.sigma2[k]),
                    _REGION_TOKENS[g.region[k]], _fmt(g.entropy[k]), _fmt(g.error[k]),
                    _METHOD_TOKENS[g.method[k]], str(int(g.depth[k])), _STATUS_TOKENS[g.status[k]],
                )
            )
        )
    return lines


def _parse_line(line: str) -> tuple:
    f = line.split(",")
    if len(f) != 10:
        raise ConfigurationError(f"malformed record: {line!r}")
    return (
        float(f[0]), float(f[1]), float(f[2]), float(f[3]),
        _REGION_TOKENS.index(f[4]), float(f[5]), float(f[6]),
        _METHOD_TOKENS.index(f[7]), int(f[8]), _STATUS_TOKENS.index(f[9]),
    )


_FIELDS = ("mu", "t", "sigma1", "sigma2", "region", "entropy", "error", "method", "depth", "status")


def _empty_grid(window, width: int, height: int) -> SweepGrid:
    n = width * height
    mu, t = cell_centres(window, width, height)
    return SweepGrid(
        tuple(window), width, height, mu, t,
        np.full(n, np.nan), np.full(n, np.nan), np.zeros(n, dtype=np.int64),
        np.full(n, np.nan), np.full(n, np.nan), np.zeros(n, dtype=np.int64),
        np.zeros(n, dtype=np.int64), np.full(n, 2, dtype=np.int64),
        np.zeros(height, dtype=bool),
    )


def _store_row(g: SweepGrid, j: int, records: list[tuple]) -> None:
    sl = slice(j * g.width, (j + 1) * g.width)
    cols = list(zip(*records))
    for name, col in zip(_FIELDS, cols):
        getattr(g, name)[sl] = col
    g.rows_done[j] = True


def _compute_row(g: SweepGrid, j: int, cfg: EntropyConfig) -> list[tuple]:
    sl = slice(j * g.width, (j + 1) * g.width)
    mu, t = g.mu[sl], g.t[sl]
    with np.errstate(all="ignore"):
        s1, s2 = project(mu, t)
    valid = (mu != 0) & (mu * t >= 0)
    region = np.zeros(mu.size, dtype=np.int64)
    region[valid] = classify_codes(mu[valid], t[valid], cfg.boundary_tol)
    res = entropy_batch(mu, t, cfg)
    return list(zip(mu, t, s1, s2, region, res.value, res.error, res.method, res.depth, res.status))


def config_key(window, width: int, height: int, cfg: EntropyConfig) -> str:
    blob = json.dumps({"window": list(window), "res": [width, height], "entropy": asdict(cfg)}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _load_checkpoint(path: Path, key: str, g: SweepGrid) -> None:
    with open(path, encoding="ascii") as fh:
        head = fh.readline()
        if not head:
            return
        meta = json.loads(head)
        if meta.get("key") != key:
            raise ConfigurationError(f"checkpoint {path} belongs to a different sweep configuration")
        for raw in fh:
            if not raw.endswith("\n"):
                break  # torn final record from an interrupted write
            rec = json.loads(raw)
            _store_row(g, int(rec["row"]), [_parse_line(s) for s in rec["lines"]])


def sweep_entropy(
    window: tuple[float, float, float, float],
    width: int,
    height: int,
    config: EntropyConfig = EntropyConfig(),
    threads: int = 1,
    checkpoint: str | os.PathLike | None = None,
    max_new_rows: int | None = None,
) -> SweepGrid:
    """Fill a grid row by row; rows already in ``checkpoint`` are reused.

    ``max_new_rows`` stops after that many freshly computed rows (the grid is
    then incomplete), which is how interruption is exercised in tests.
    """
    check_window(tuple(window))
    if width < 1 or height < 1:
        raise ConfigurationError("resolution must be positive")
    g = _empty_grid(window, width, height)
    key = config_key(window, width, height, config)
    ck = Path(checkpoint) if checkpoint is not None else None
    if ck is not None and ck.exists() and ck.stat().st_size > 0:
        _load_checkpoint(ck, key, g)
    pending = [j for j in range(height) if not g.rows_done[j]]
    if max_new_rows is not None:
        pending = pending[:max_new_rows]
    fh = None
    if ck is not None:
        fresh = not ck.exists() or ck.stat().st_size == 0
        fh = open(ck, "a", encoding="ascii")
        if fresh:
            fh.write(json.dumps({"key": key, "width": width, "height": height}) + "\n")
            fh.flush()
    try:
        def work(j: int) -> tuple[int, list[tuple]]:
            return j, _compute_row(g, j, config)

        if threads <= 1:
            results = map(work, pending)
            ex = None
        else:
            ex = ThreadPoolExecutor(max_workers=threads)
            results = ex.map(work, pending)
        try:
            for j, recs in results:
                _store_row(g, j, recs)
                if fh is not None:
                    fh.write(json.dumps({"row": j, "lines": _row_lines(g, j)}) + "\n")
                    fh.flush()
                    os.fsync(fh.fileno())
        finally:
            if ex is not None:
                ex.shutdown()
    finally:
        if fh is not None:
            fh.close()
    return g


# ---------------------------------------------------------------------------
# files


def grid_to_csv(g: SweepGrid) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for j in range(g.height):
        if g.rows_done[j]:
            for line in _row_lines(g, j):
                buf.write(line + "\n")
    return buf.getvalue()


def write_csv(g: SweepGrid, path: str | os.PathLike) -> None:
    Path(path).write_text(grid_to_csv(g), encoding="ascii")


def read_csv(path: str | os.PathLike) -> SweepGrid:
    """Rebuild a complete grid from a sweep CSV; the window is inferred from the cell centres."""
    text = Path(path).read_text(encoding="ascii").splitlines()
    if not text or text[0] != CSV_HEADER:
        raise ConfigurationError(f"{path} is not a sweep CSV")
    recs = [_parse_line(s) for s in text[1:] if s]
    if not recs:
        g = _empty_grid((0.0, 1.0, 0.0, 1.0), 0, 0)
        return g
    mu = np.array([r[0] for r in recs])
    t = np.array([r[1] for r in recs])
    width = int(np.flatnonzero(t != t[0])[0]) if np.any(t != t[0]) else len(recs)
    height = len(recs) // width
    dmu = (mu[width - 1] - mu[0]) / max(width - 1, 1) if width > 1 else 1.0
    dt = (t[-1] - t[0]) / max(height - 1, 1) if height > 1 else 1.0
    window = (mu[0] - dmu / 2, mu[width - 1] + dmu / 2, t[0] - dt / 2, t[-1] + dt / 2)
    g = _empty_grid(window, width, height)
    for j in range(height):
        _store_row(g, j, recs[j * width : (j + 1) * width])
    return g


def band_image(g: SweepGrid, bands: BandSpec) -> np.ndarray:
    """RGB raster (height x width x 3) with the largest t in the top row."""
    idx = g.as_image(bands.assign(g.entropy, g.status))
    colours = np.array(bands.colours(), dtype=np.uint8)
    img = np.zeros((g.height, g.width, 3), dtype=np.uint8)
    ok = idx >= 0
    img[ok] = colours[idx[ok]]
    img[idx == FAILURE] = FAILURE_RGB
    img[idx == UNCONVERGED] = UNCONVERGED_RGB
    return img[::-1]


def ppm_bytes(img: np.ndarray) -> bytes:
    h, w, _ = img.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(img, dtype=np.uint8).tobytes()


def write_ppm(img: np.ndarray, path: str | os.PathLike) -> None:
    Path(path).write_bytes(ppm_bytes(img))


def read_ppm(path: str | os.PathLike) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ConfigurationError(f"{path} is not a binary PPM")
    w, h = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)


def band_counts(g: SweepGrid, bands: BandSpec) -> dict[str, int]:
    idx = bands.assign(g.entropy, g.status)
    out = {lab: int(np.sum(idx == k)) for k, lab in enumerate(bands.labels())}
    out["failure"] = int(np.sum(idx == FAILURE))
    out["unconverged"] = int(np.sum(idx == UNCONVERGED))
    return out


# ---------------------------------------------------------------------------
# projection and connectivity


@dataclass
class Projection:
    """Scatter of ``(sigma1, sigma2, band)``; cells beyond the clamp are only counted."""

    sigma1: np.ndarray
    sigma2: np.ndarray
    band: np.ndarray
    suppressed: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("sigma1,sigma2,band\n")
        for a, b, c in zip(self.sigma1, self.sigma2, self.band):
            buf.write(f"{_fmt(a)},{_fmt(b)},{int(c)}\n")
        return buf.getvalue()


def project_to_moduli(g: SweepGrid, bands: BandSpec = FIG6, sigma2_clamp: float = 10.0) -> Projection:
    done = np.repeat(g.rows_done, g.width) if g.rows_done.size else np.zeros(0, dtype=bool)
    s1, s2 = g.sigma1[done], g.sigma2[done]
    band = bands.assign(g.entropy[done], g.status[done])
    keep = np.isfinite(s1) & np.isfinite(s2) & (np.abs(s2) < sigma2_clamp)
    return Projection(s1[keep], s2[keep], band[keep], int(np.sum(~keep)))


REGION_MASKS = ("all", "U1", "U2", "U3", "below-per1")


def region_mask(g: SweepGrid, name: str) -> np.ndarray:
    if name == "all":
        return np.ones(g.mu.size, dtype=bool)
    if name == "below-per1":
        with np.errstate(invalid="ignore"):
            return 2.0 * g.sigma1 - g.sigma2 - 3.0 > 0.0
    try:
        dom = FamilyDomain(name)
    except ValueError as exc:
        raise ConfigurationError(f"unknown region mask {name!r}") from exc
    return family_masks(g.mu, g.t)[dom]


@dataclass
class ConnectivityReport:
    band: tuple[float, float]
    region: str
    n_cells: int
    components: int
    sizes: list[int]
    bboxes: list[tuple[float, float, float, float]]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def isentrope_connectivity(
    g: SweepGrid,
    band: tuple[float, float],
    region: str = "all",
    closed: bool = False,
) -> ConnectivityReport:
    """4-connected components of converged cells with entropy in ``[lo, hi)`` (``[lo, hi]`` if closed)."""
    lo, hi = band
    v = g.entropy
    with np.errstate(invalid="ignore"):
        inb = (v >= lo) & ((v <= hi) if closed else (v < hi))
    sel = inb & (g.status == 0) & region_mask(g, region)
    img = g.as_image(sel)
    labels, count = ndimage.label(img)
    sizes = np.bincount(labels.ravel())[1:] if count else np.zeros(0, dtype=int)
    order = np.argsort(-sizes, kind="stable")
    mus = g.as_image(g.mu)
    ts = g.as_image(g.t)
    boxes = []
    for k in order:
        ys, xs = np.nonzero(labels == k + 1)
        boxes.append(
            (float(mus[ys, xs].min()), float(mus[ys, xs].max()), float(ts[ys, xs].min()), float(ts[ys, xs].max()))
        )
    return ConnectivityReport((float(lo), float(hi)), region, int(sel.sum()), int(count), [int(sizes[k]) for k in order], boxes)


def band_interval(bands: BandSpec, k: int) -> tuple[tuple[float, float], bool]:
    """Interval of band ``k`` and whether it is closed on the right (only the last band)."""
    if not 0 <= k < bands.n_bands:
        raise ConfigurationError(f"band index {k} out of range")
    return (bands.edges[k], bands.edges[k + 1]), k == bands.n_bands - 1
