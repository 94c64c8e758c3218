"""Randomized search for instances without a Monge solution.

Every trial is generated from its own Philox stream: the 64-bit master seed
is the Philox key and the trial index occupies the most significant word of
the 256-bit counter (``counter = [0, 0, 0, trial_index]``).  A trial draws
far fewer than 2^64 blocks, so streams never overlap, and any trial can be
regenerated from ``(master_seed, trial_index)`` alone, regardless of how the
work was split across processes.
"""

from __future__ import annotations

import concurrent.futures
import json
import logging
import math
import os
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .cost import build_tensor
from .errors import EmptyHistogram, MMOTError
from .measures import Instance, make_instance
from .monge import enumerate_mmc
from .simplex import Mode, solve_lp

log = logging.getLogger(__name__)

MONGE = "Monge"
NON_MONGE = "NonMonge"


@dataclass(frozen=True)
class IsotropicGaussian:
    sigma: float = 3.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        return self.sigma * rng.standard_normal(shape)

    def describe(self) -> dict:
        return {"kind": "gaussian", "sigma": self.sigma}


@dataclass(frozen=True)
class UniformCube:
    halfwidth: float = 5.0

    def __post_init__(self):
        if not self.halfwidth > 0:
            raise ValueError(f"halfwidth must be positive, got {self.halfwidth}")

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        return rng.uniform(-self.halfwidth, self.halfwidth, shape)

    def describe(self) -> dict:
        return {"kind": "uniform", "halfwidth": self.halfwidth}


Distribution = Union[IsotropicGaussian, UniformCube]


@dataclass(frozen=True)
class GeneratorConfig:
    N: int = 3
    m: int = 3
    d: int = 2
    distribution: Distribution = field(default_factory=IsotropicGaussian)
    master_seed: int = 0

    def __post_init__(self):
        for name in ("N", "m", "d"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 unsigned bits")

    def describe(self) -> dict:
        return {"N": self.N, "m": self.m, "d": self.d, "distribution": self.distribution.describe(), "master_seed": self.master_seed}


@dataclass(frozen=True)
class ClassifyTolerances:
    abs_tol: float = 1e-7
    rel_tol: float = 1e-9

    def threshold(self, lp_value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(lp_value))


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=master_seed, counter=[0, 0, 0, trial_index]))


def generate_instance(config: GeneratorConfig, trial_index: int) -> Instance:
    """The instance of trial ``trial_index``; a pure function of its arguments."""
    rng = trial_rng(config.master_seed, trial_index)
    return make_instance(config.distribution.sample(rng, (config.N, config.m, config.d)))


reconstruct = generate_instance


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    lp_value: float
    mmc: float
    relative_gap_percent: float
    classification: str
    instance_digest: tuple[int, int] | None = None
    exact_certified: bool | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _gap_percent(lp_value, mmc) -> float:
    if lp_value == 0:
        return 0.0 if mmc == lp_value else math.inf
    return float(100 * (mmc - lp_value) / lp_value)


def exact_gap(instance: Instance):
    """``mmc - lp_value`` as an exact rational."""
    tensor = build_tensor(instance, exact=True)
    lp = solve_lp(instance, tensor, Mode.EXACT)
    return enumerate_mmc(instance, tensor).mmc - lp.value


def classify(
    instance: Instance,
    tolerances: ClassifyTolerances = ClassifyTolerances(),
    *,
    exact_audit: bool = False,
    trial_index: int = -1,
    digest: tuple[int, int] | None = None,
) -> TrialRecord:
    """Solve the LP and the Monge enumeration and compare them.

    A trial is ``NonMonge`` when the minimal Monge cost exceeds the LP value
    by more than ``max(abs_tol, rel_tol * lp_value)``.  With ``exact_audit``
    a ``NonMonge`` verdict is re-checked in rational arithmetic and
    ``exact_certified`` records whether the gap is strictly positive.
    """
    tensor = build_tensor(instance)
    lp = solve_lp(instance, tensor)
    mmc = enumerate_mmc(instance, tensor).mmc
    non_monge = mmc - lp.value > tolerances.threshold(lp.value)
    certified = None
    if non_monge and exact_audit:
        certified = bool(exact_gap(instance) > 0)
    return TrialRecord(
        trial_index=trial_index,
        lp_value=lp.value,
        mmc=mmc,
        relative_gap_percent=_gap_percent(lp.value, mmc),
        classification=NON_MONGE if non_monge else MONGE,
        instance_digest=digest,
        exact_certified=certified,
    )


@dataclass(frozen=True)
class SearchSummary:
    config: dict
    trials: int
    failures: int
    failure_rate: float
    max_gap_percent: float
    min_gap_percent: float
    histogram: tuple[tuple[float, float, int], ...]
    errors: int = 0
    audited: int = 0
    audit_certified: int = 0

    def to_dict(self) -> dict:
        out = asdict(self)
        out["histogram"] = [list(b) for b in self.histogram]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


@dataclass
class SearchResult:
    summary: SearchSummary
    failures: list[TrialRecord]
    errors: list[tuple[int, str]]
    min_margin: float = 0.0


def histogram_bins(gaps: Iterable[float], bins: int = 20, upper: float | None = None) -> tuple[tuple[float, float, int], ...]:
    """Equal-width bins over ``[0, max(gaps)]``; empty when there are no gaps."""
    gaps = np.asarray(list(gaps), dtype=np.float64)
    if gaps.size == 0:
        return ()
    top = float(gaps.max()) if upper is None else float(upper)
    if top <= 0:
        top = 1.0
    counts, edges = np.histogram(gaps, bins=bins, range=(0.0, top))
    return tuple((float(edges[k]), float(edges[k + 1]), int(counts[k])) for k in range(bins))


def _run_chunk(args) -> tuple[list[TrialRecord], list[tuple[int, str]], float]:
    config, start, stop, tolerances, exact_audit = args
    failures, errors = [], []
    margin = math.inf
    for t in range(start, stop):
        try:
            inst = generate_instance(config, t)
            rec = classify(inst, tolerances, exact_audit=exact_audit, trial_index=t, digest=(config.master_seed, t))
        except MMOTError as exc:
            errors.append((t, f"{type(exc).__name__}: {exc}"))
            continue
        margin = min(margin, rec.mmc - rec.lp_value)
        if rec.classification == NON_MONGE:
            failures.append(rec)
    return failures, errors, margin


def default_workers() -> int:
    cap = os.environ.get("MMOT_THREADS")
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def run_search(
    config: GeneratorConfig,
    trials: int,
    tolerances: ClassifyTolerances = ClassifyTolerances(),
    *,
    exact_audit: bool = True,
    workers: int | None = None,
    chunk_size: int = 2000,
    bins: int = 20,
    log_path: str | os.PathLike | None = None,
) -> SearchResult:
    """Classify ``trials`` generated instances and summarize the failures.

    The result depends only on ``(config, trials, tolerances, bins)``: chunks
    are merged in trial order whatever the worker count.  Failure records are
    written as JSON lines to ``log_path`` when given.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    workers = default_workers() if workers is None else max(1, workers)
    jobs = [(config, s, min(s + chunk_size, trials), tolerances, exact_audit) for s in range(0, trials, chunk_size)]
    if workers == 1 or len(jobs) == 1:
        results = [_run_chunk(j) for j in jobs]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, jobs))
    failures = [r for chunk in results for r in chunk[0]]
    errors = [e for chunk in results for e in chunk[1]]
    margin = min((chunk[2] for chunk in results), default=math.inf)
    for t, msg in errors:
        log.warning("trial %d failed: %s", t, msg)
    gaps = [r.relative_gap_percent for r in failures]
    audited = [r for r in failures if r.exact_certified is not None]
    summary = SearchSummary(
        config=config.describe(),
        trials=trials,
        failures=len(failures),
        failure_rate=len(failures) / trials,
        max_gap_percent=max(gaps, default=0.0),
        min_gap_percent=min(gaps, default=0.0),
        histogram=histogram_bins(gaps, bins),
        errors=len(errors),
        audited=len(audited),
        audit_certified=sum(1 for r in audited if r.exact_certified),
    )
    if log_path is not None:
        write_failure_log(failures, log_path)
    return SearchResult(summary, failures, errors, margin)


def write_failure_log(records: Iterable[TrialRecord], path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")


def read_failure_log(path: str | os.PathLike) -> list[TrialRecord]:
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                raw = json.loads(line)
                if raw.get("instance_digest") is not None:
                    raw["instance_digest"] = tuple(raw["instance_digest"])
                out.append(TrialRecord(**raw))
    return out


def histogram_csv(histogram) -> str:
    lines = ["bin_lower,bin_upper,count"]
    lines += [f"{lo!r},{hi!r},{n}" for lo, hi, n in histogram]
    return "\n".join(lines) + "\n"


def histogram_svg(histogram, *, width: int = 640, height: int = 360, title: str = "Relative gap of minimal Monge cost") -> str:
    margin_l, margin_r, margin_t, margin_b = 56, 16, 36, 48
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-family="sans-serif" font-size="14">{title}</text>',
        f'<line x1="{margin_l}" y1="{margin_t + plot_h}" x2="{margin_l + plot_w}" y2="{margin_t + plot_h}" stroke="black"/>',
        f'<line x1="{margin_l}" y1="{margin_t}" x2="{margin_l}" y2="{margin_t + plot_h}" stroke="black"/>',
        f'<text x="{margin_l + plot_w / 2:.1f}" y="{height - 10}" text-anchor="middle" font-family="sans-serif" font-size="12">gap (%)</text>',
        f'<text x="14" y="{margin_t + plot_h / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 14 {margin_t + plot_h / 2:.1f})">count</text>',
    ]
    if histogram:
        top = max(n for _, _, n in histogram) or 1
        bar_w = plot_w / len(histogram)
        for k, (lo, hi, n) in enumerate(histogram):
            h = plot_h * n / top
            x = margin_l + k * bar_w
            y = margin_t + plot_h - h
            parts.append(
                f'<rect class="bar" x="{x:.2f}" y="{y:.2f}" width="{bar_w * 0.9:.2f}" height="{h:.2f}" fill="steelblue">'
                f"<title>[{lo:.4g}, {hi:.4g}): {n}</title></rect>"
            )
        lo0, hi_last = histogram[0][0], histogram[-1][1]
        parts.append(f'<text x="{margin_l}" y="{margin_t + plot_h + 16}" text-anchor="middle" font-family="sans-serif" font-size="11">{lo0:.3g}</text>')
        parts.append(
            f'<text x="{margin_l + plot_w}" y="{margin_t + plot_h + 16}" text-anchor="middle" font-family="sans-serif" font-size="11">{hi_last:.3g}</text>'
        )
        parts.append(f'<text x="{margin_l - 6}" y="{margin_t + 4}" text-anchor="end" font-family="sans-serif" font-size="11">{top}</text>')
    else:
        parts.append(
            f'<text x="{margin_l + plot_w / 2:.1f}" y="{margin_t + plot_h / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="12">no failures</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def export_histogram(summary: SearchSummary, path: str | os.PathLike, fmt: str | None = None) -> Path:
    """Write the summary histogram as CSV or SVG (format inferred from the suffix)."""
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".")).lower()
    if fmt not in ("csv", "svg"):
        raise ValueError(f"unknown histogram format {fmt!r} (expected csv or svg)")
    if not summary.histogram:
        warnings.warn("no failures to bin; writing an empty histogram", EmptyHistogram, stacklevel=2)
    if fmt == "csv":
        path.write_text(histogram_csv(summary.histogram))
    else:
        path.write_text(histogram_svg(summary.histogram))
    return path
