"""Two-sample comparisons: Student's t-test with Holm step-down adjustment.

Self-contained on purpose: the t distribution tail is computed from the
regularized incomplete beta function (continued-fraction evaluation), so
the test suite can check these numbers against an unrelated reference
implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


def mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


def sample_variance(values: Sequence[float]) -> float:
    if len(values) < 2:
        raise ValueError("sample variance needs n >= 2")
    m = mean(values)
    return sum((v - m) ** 2 for v in values) / (len(values) - 1)


def sample_sd(values: Sequence[float]) -> float:
    return math.sqrt(sample_variance(values))


def standard_error(values: Sequence[float]) -> float:
    return sample_sd(values) / math.sqrt(len(values))


def format_mean_se(values: Sequence[float]) -> str:
    if len(values) == 1:
        return f"{values[0]:.2f} ± 0.00"
    return f"{mean(values):.2f} ± {standard_error(values):.2f}"


# --- regularized incomplete beta ---

def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-14:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        a * math.log(x)
        + b * math.log1p(-x)
        - (math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(statistic: float, df: float) -> float:
    """P(|T| >= |statistic|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    x = df / (df + statistic * statistic)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


# --- two-sample tests ---

@dataclass(frozen=True)
class TTestResult:
    statistic: float
    df: float
    p_value: float
    degenerate: bool = False


def t_test_two_sample(a: Sequence[float], b: Sequence[float], welch: bool = False) -> TTestResult:
    """Two-sided two-sample t-test; pooled variance by default, Welch on request.

    Zero variance in both samples is degenerate: p is reported as exactly 1.0
    (equal means) or 0.0 (different means) and flagged, never computed from a
    meaningless statistic.
    """
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise ValueError("each sample needs n >= 2")
    ma, mb = mean(a), mean(b)
    va, vb = sample_variance(a), sample_variance(b)
    if welch:
        se_sq = va / na + vb / nb
        if se_sq == 0.0:
            return _degenerate(ma, mb)
        df = se_sq**2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    else:
        pooled = ((na - 1) * va + (nb - 1) * vb) / (na + nb - 2)
        se_sq = pooled * (1.0 / na + 1.0 / nb)
        if se_sq == 0.0:
            return _degenerate(ma, mb)
        df = float(na + nb - 2)
    statistic = (ma - mb) / math.sqrt(se_sq)
    return TTestResult(statistic, df, student_t_two_sided_p(statistic, df))


def _degenerate(ma: float, mb: float) -> TTestResult:
    if ma == mb:
        return TTestResult(0.0, 0.0, 1.0, degenerate=True)
    return TTestResult(math.inf if ma > mb else -math.inf, 0.0, 0.0, degenerate=True)


def holm_adjust(p_values: Sequence[float]) -> list[float]:
    """Holm step-down adjustment; output order matches input order."""
    m = len(p_values)
    order = sorted(range(m), key=lambda i: p_values[i])
    adjusted = [0.0] * m
    running = 0.0
    for rank, idx in enumerate(order):
        running = max(running, (m - rank) * p_values[idx])
        adjusted[idx] = min(1.0, running)
    return adjusted


@dataclass(frozen=True)
class PairwiseComparison:
    label: str
    statistic: float
    df: float
    raw_p: float
    adjusted_p: float
    degenerate: bool


def t_test_holm(
    groups: Sequence[tuple[Sequence[float], Sequence[float]]],
    labels: Sequence[str] | None = None,
    welch: bool = False,
) -> list[PairwiseComparison]:
    """Pairwise t-tests with family-wise Holm adjustment across all pairs."""
    if labels is None:
        labels = [f"pair{i}" for i in range(len(groups))]
    results = [t_test_two_sample(a, b, welch=welch) for a, b in groups]
    adjusted = holm_adjust([r.p_value for r in results])
    return [
        PairwiseComparison(
            label=labels[i],
            statistic=results[i].statistic,
            df=results[i].df,
            raw_p=results[i].p_value,
            adjusted_p=adjusted[i],
            degenerate=results[i].degenerate,
        )
        for i in range(len(groups))
    ]
