"""Kaplan-Meier curves, the two-sample log-rank test, and median-risk splits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats


@dataclass
class KmCurve:
    times: np.ndarray      # distinct event times
    survival: np.ndarray   # S(t) just after each time
    at_risk: np.ndarray
    events: np.ndarray
    variance: np.ndarray   # Greenwood variance of S(t)

    def at(self, t) -> float:
        """Step-function value S(t)."""
        idx = np.searchsorted(self.times, t, side="right") - 1
        return 1.0 if idx < 0 else float(self.survival[idx])

    def confidence_band(self, z: float = 1.959963984540054):
        """Pointwise log-scale Greenwood interval, clipped to [0, 1]."""
        with np.errstate(divide="ignore", invalid="ignore"):
            se_log = np.sqrt(self.variance) / self.survival
            lower = self.survival * np.exp(-z * se_log)
            upper = self.survival * np.exp(z * se_log)
        lower = np.where(self.survival > 0, lower, 0.0)
        upper = np.where(self.survival > 0, upper, 0.0)
        return np.clip(lower, 0, 1), np.clip(upper, 0, 1)


@dataclass
class LogRankResult:
    statistic: float
    p_value: float
    observed: tuple[float, float] = (0.0, 0.0)
    expected: tuple[float, float] = (0.0, 0.0)
    variance: float = 0.0


def kaplan_meier(time, event) -> KmCurve:
    time = np.asarray(time, dtype=np.float64)
    event = np.asarray(event, dtype=np.int64)
    if time.size == 0:
        raise ValueError("kaplan_meier needs at least one record")
    uniq = np.unique(time[event == 1])
    at_risk = np.array([(time >= t).sum() for t in uniq], dtype=np.int64)
    deaths = np.array([((time == t) & (event == 1)).sum() for t in uniq], dtype=np.int64)
    surv = np.cumprod(1.0 - deaths / at_risk) if uniq.size else np.zeros(0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(at_risk > deaths, deaths / (at_risk * (at_risk - deaths)), 0.0)
    var = surv**2 * np.cumsum(terms)
    return KmCurve(uniq, surv, at_risk, deaths, var)


def log_rank_test(time_a, event_a, time_b, event_b) -> LogRankResult:
    """Two-sample log-rank chi-square (1 df) with hypergeometric variance."""
    ta, ea = np.asarray(time_a, float), np.asarray(event_a, int)
    tb, eb = np.asarray(time_b, float), np.asarray(event_b, int)
    if ta.size == 0 or tb.size == 0:
        raise ValueError("both groups must be non-empty")
    times = np.unique(np.concatenate([ta[ea == 1], tb[eb == 1]]))
    if times.size == 0:
        return LogRankResult(0.0, 1.0)
    o_a = e_a = v = 0.0
    o_b = e_b = 0.0
    for t in times:
        na = float((ta >= t).sum())
        nb = float((tb >= t).sum())
        da = float(((ta == t) & (ea == 1)).sum())
        db = float(((tb == t) & (eb == 1)).sum())
        n, d = na + nb, da + db
        o_a += da
        o_b += db
        e_a += d * na / n
        e_b += d * nb / n
        if n > 1:
            v += d * (na / n) * (nb / n) * (n - d) / (n - 1)
    if v <= 0:
        return LogRankResult(0.0, 1.0, (o_a, o_b), (e_a, e_b), v)
    stat = (o_a - e_a) ** 2 / v
    p = float(stats.chi2.sf(stat, df=1))
    return LogRankResult(float(stat), min(max(p, 0.0), 1.0), (o_a, o_b), (e_a, e_b), float(v))


@dataclass
class RiskSplit:
    high: np.ndarray  # indices
    low: np.ndarray
    threshold: float
    degenerate: bool


def median_risk_split(risks) -> RiskSplit:
    """High group = risk above the floor(n/2)-th smallest risk.

    For even n the threshold is the lower central order statistic; for odd n
    the middle subject lands in the high group, giving ceil(n/2) high. Ties at
    the threshold go low.
    """
    r = np.asarray(risks, dtype=np.float64)
    if r.size < 2:
        raise ValueError("need at least two risks to split")
    thr = float(np.sort(r)[r.size // 2 - 1])
    high = np.flatnonzero(r > thr)
    low = np.flatnonzero(r <= thr)
    degenerate = bool(np.all(r == r[0])) or high.size == 0
    return RiskSplit(high, low, thr, degenerate)


def split_log_rank(risks, time, event) -> tuple[RiskSplit, LogRankResult]:
    split = median_risk_split(risks)
    time, event = np.asarray(time), np.asarray(event)
    if split.degenerate:
        return split, LogRankResult(0.0, 1.0)
    res = log_rank_test(time[split.high], event[split.high], time[split.low], event[split.low])
    return split, res


def write_km_csv(path, curves: dict[str, KmCurve]) -> None:
    """Rows: group, time, survival, lower, upper (log-scale Greenwood, 95%)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["group", "time", "survival", "lower", "upper", "ci"])
        for group, km in curves.items():
            lo, hi = km.confidence_band()
            w.writerow([group, "0.0", "1.0", "1.0", "1.0", "log-greenwood-95"])
            for t, s, a, b in zip(km.times, km.survival, lo, hi):
                w.writerow([group, repr(float(t)), repr(float(s)), repr(float(a)),
                            repr(float(b)), "log-greenwood-95"])


def km_svg(curves: dict[str, KmCurve], p_value: float | None = None, t_max: float | None = None,
           width: int = 480, height: int = 320) -> str:
    """Minimal step-plot SVG for up to a handful of curves."""
    colors = ["#c0392b", "#2471a3", "#27ae60", "#8e44ad"]
    pad = 40
    if t_max is None:
        t_max = max((float(k.times[-1]) for k in curves.values() if k.times.size), default=1.0)
    t_max = t_max or 1.0

    def px(t, s):
        return pad + (width - 2 * pad) * t / t_max, height - pad - (height - 2 * pad) * s

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
             f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>']
    for i, (name, km) in enumerate(curves.items()):
        pts = [px(0.0, 1.0)]
        s_prev = 1.0
        for t, s in zip(km.times, km.survival):
            pts.append(px(float(t), s_prev))
            pts.append(px(float(t), float(s)))
            s_prev = float(s)
        pts.append(px(t_max, s_prev))
        path = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        color = colors[i % len(colors)]
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{path}"/>')
        parts.append(f'<text x="{width - pad - 100}" y="{pad + 14 * (i + 1)}" fill="{color}" '
                     f'font-size="12">{name}</text>')
    if p_value is not None:
        parts.append(f'<text x="{pad + 8}" y="{height - pad - 8}" font-size="12">'
                     f'log-rank p = {p_value:.3g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
