"""Filter parameter-space analysis.

Reproduces the selection study behind the fixed (m=2**18, k=2)
geometry: false-positive rate as a function of (m, k, n), the
entropy-model compressed size, the cumulative rate across chained
filters, and an exhaustive sweep ranking candidate geometries by
compressed size.

The false-positive rate uses the exact power form

    f(m, k, n) = (1 - (1 - 1/m) ** (k * n)) ** k

evaluated in extended precision, not the e**(-kn/m) approximation; the
maximal-n boundaries are sensitive to the difference.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp, mpf, power

_DPS = 50


def _fpr_mp(m: int, k: int, n: int):
    """Exact-form false-positive rate as an mpmath value."""
    return (1 - power(1 - mpf(1) / m, k * n)) ** k


def fpr(m: int, k: int, n: int) -> float:
    """False-positive probability after n insertions.

    Zero for an empty filter; strictly increasing in n.
    """
    if n == 0:
        return 0.0
    with mp.workdps(_DPS):
        return float(_fpr_mp(m, k, n))


def entropy_size_bytes(m: int, k: int, n: int) -> int:
    """Ideal compressed size, in whole bytes, of a filter holding n items.

    With p = (1 - 1/m)**(k*n) the probability a bit stays zero, an
    optimal compressor needs m * H(p) bits, where H is the binary
    entropy function. Rounds half-up to bytes.
    """
    with mp.workdps(_DPS):
        p = power(1 - mpf(1) / m, k * n)
        entropy = -p * mp.log(p, 2) - (1 - p) * mp.log(1 - p, 2)
        return int(mp.floor(m * entropy / 8 + mpf("0.5")))


def cumulative_fpr(f: float, q: int) -> float:
    """Combined false-positive rate across q chained filters: 1-(1-f)**q."""
    return 1.0 - (1.0 - f) ** q


def max_n(m: int, k: int, f_bound: float) -> int:
    """Largest n with fpr(m, k, n) within the bound; 0 if none is.

    Monotonicity of the rate in n justifies the doubling-plus-bisection
    search.
    """
    with mp.workdps(_DPS):
        bound = mpf(f_bound)
        if _fpr_mp(m, k, 1) > bound:
            return 0
        lo, hi = 1, 2
        while _fpr_mp(m, k, hi) <= bound:
            lo, hi = hi, hi * 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _fpr_mp(m, k, mid) <= bound:
                lo = mid
            else:
                hi = mid
        return lo


@dataclass(frozen=True)
class ParamPoint:
    """One candidate geometry from the sweep."""

    m: int
    k: int
    n_max: int
    f: float
    z_bytes: int
    bytes_per_item: float


def sweep(
    max_log2_m: int = 24,
    max_k: int = 6,
    min_n: int = 1000,
    f_bound: float = 2.0 ** -14,
) -> list[ParamPoint]:
    """Enumerate power-of-two geometries and rank them by compressed size.

    Keeps every (m=2**j, k) with j <= max_log2_m and k <= max_k whose
    maximal item count meets min_n under the false-positive bound.
    Sorted ascending by compressed size, ties broken by (m, k).

    The default k ceiling of 6 spans every k in the reference top-five
    ranking; raising it admits additional higher-k geometries (the
    first appears at k=7, m=2**15) that reorder the head of the list.
    """
    points = []
    for j in range(1, max_log2_m + 1):
        m = 1 << j
        for k in range(1, max_k + 1):
            n = max_n(m, k, f_bound)
            if n < min_n or n == 0:
                continue
            z = entropy_size_bytes(m, k, n)
            points.append(
                ParamPoint(
                    m=m,
                    k=k,
                    n_max=n,
                    f=fpr(m, k, n),
                    z_bytes=z,
                    bytes_per_item=z / n,
                )
            )
    points.sort(key=lambda p: (p.z_bytes, p.m, p.k))
    return points
