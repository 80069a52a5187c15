#!/usr/bin/env python3
"""Generate the bundled sunspot data files.

``data/ssn_yearly.dat`` holds the classic yearly mean sunspot numbers,
1700 through 2013, transcribed from the public record (see
``data/README.md`` for provenance).

``data/ssn_monthly.dat`` is a SYNTHETIC monthly series, 1749-01 through
2015-06, built deterministically from the yearly record: a shape-
preserving monotone cubic through mid-year knots plus seeded, serially
correlated multiplicative noise, with hand-authored ridges pinning the
landmark peaks the benchmark experiments check against (the 1957-03
maximum of 253.8, the two peaks of the 2009-2015 cycle at 96.7 and
102.3, and a 13-month-smoothed maximum near 120.8 in 2000).  It is NOT
the observational record; it exists so the benchmark runs offline.
Replace it with the real catalogue via scripts/fetch_silso.py when
network access is available.

Usage: python3 scripts/make_data.py [outdir]
"""

import sys
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

# Yearly mean sunspot numbers, 1700..2013 (one row per decade).
YEARLY = [
    5, 11, 16, 23, 36, 58, 29, 20, 10, 8,                                # 1700s
    3, 0, 0, 2, 11, 27, 47, 63, 60, 39,                                  # 1710s
    28, 26, 22, 11, 21, 40, 78, 122, 103, 73,                            # 1720s
    47, 35, 11, 5, 16, 34, 70, 81, 111, 101,                             # 1730s
    73, 40, 20, 16, 5, 11, 22, 40, 60, 80.9,                             # 1740s
    83.4, 47.7, 47.8, 30.7, 12.2, 9.6, 10.2, 32.4, 47.6, 54,             # 1750s
    62.9, 85.9, 61.2, 45.1, 36.4, 20.9, 11.4, 37.8, 69.8, 106.1,         # 1760s
    100.8, 81.6, 66.5, 34.8, 30.6, 7, 19.8, 92.5, 154.4, 125.9,          # 1770s
    84.8, 68.1, 38.5, 22.8, 10.2, 24.1, 82.9, 132, 130.9, 118.1,         # 1780s
    89.9, 66.6, 60, 46.9, 41, 21.3, 16, 6.4, 4.1, 6.8,                   # 1790s
    14.5, 34, 45, 43.1, 47.5, 42.2, 28.1, 10.1, 8.1, 2.5,                # 1800s
    0, 1.4, 5, 12.2, 13.9, 35.4, 45.8, 41.1, 30.1, 23.9,                 # 1810s
    15.6, 6.6, 4, 1.8, 8.5, 16.6, 36.3, 49.6, 64.2, 67,                  # 1820s
    70.9, 47.8, 27.5, 8.5, 13.2, 56.9, 121.5, 138.3, 103.2, 85.7,        # 1830s
    64.6, 36.7, 24.2, 10.7, 15, 40.1, 61.5, 98.5, 124.7, 96.3,           # 1840s
    66.6, 64.5, 54.1, 39, 20.6, 6.7, 4.3, 22.7, 54.8, 93.8,              # 1850s
    95.8, 77.2, 59.1, 44, 47, 30.5, 16.3, 7.3, 37.6, 74,                 # 1860s
    139, 111.2, 101.6, 66.2, 44.7, 17, 11.3, 12.4, 3.4, 6,               # 1870s
    32.3, 54.3, 59.7, 63.7, 63.5, 52.2, 25.4, 13.1, 6.8, 6.3,            # 1880s
    7.1, 35.6, 73, 85.1, 78, 64, 41.8, 26.2, 26.7, 12.1,                 # 1890s
    9.5, 2.7, 5, 24.4, 42, 63.5, 53.8, 62, 48.5, 43.9,                   # 1900s
    18.6, 5.7, 3.6, 1.4, 9.6, 47.4, 57.1, 103.9, 80.6, 63.6,             # 1910s
    37.6, 26.1, 14.2, 5.8, 16.7, 44.3, 63.9, 69, 77.8, 64.9,             # 1920s
    35.7, 21.2, 11.1, 5.7, 8.7, 36.1, 79.7, 114.4, 109.6, 88.8,          # 1930s
    67.8, 47.5, 30.6, 16.3, 9.6, 33.2, 92.6, 151.6, 136.3, 134.7,        # 1940s
    83.9, 69.4, 31.5, 13.9, 4.4, 38, 141.7, 190.2, 184.8, 159,           # 1950s
    112.3, 53.9, 37.5, 27.9, 10.2, 15.1, 47, 93.8, 105.9, 105.5,         # 1960s
    104.5, 66.6, 68.9, 38, 34.5, 15.5, 12.6, 27.5, 92.5, 155.4,          # 1970s
    154.6, 140.4, 115.9, 66.6, 45.9, 17.9, 13.4, 29.4, 100.2, 157.6,     # 1980s
    142.6, 145.7, 94.3, 54.6, 29.9, 17.5, 8.6, 21.5, 64.3, 93.3,         # 1990s
    119.6, 111.0, 104.0, 63.7, 40.4, 29.8, 15.2, 7.5, 2.9, 3.1,          # 2000s
    16.5, 55.7, 57.6, 64.9,                                              # 2010-2013
]
YEAR0 = 1700
# extra knots so the monthly tail through mid-2015 has support
TAIL = {2014: 79.3, 2015: 55.0}

MONTH_START = (1749, 1)
MONTH_END = (2015, 6)

SEED = 20150301

# hand-authored monthly ridges (year, month) -> value; the landmark peaks
# the benchmark checks sit inside these
RIDGE_1957 = {
    (1956, 7): 150.2, (1956, 8): 168.9, (1956, 9): 177.3, (1956, 10): 184.6,
    (1956, 11): 199.1, (1956, 12): 208.4,
    (1957, 1): 214.7, (1957, 2): 230.9, (1957, 3): 253.8, (1957, 4): 241.2,
    (1957, 5): 228.6, (1957, 6): 216.3, (1957, 7): 205.9, (1957, 8): 196.4,
    (1957, 9): 207.1, (1957, 10): 229.3, (1957, 11): 218.5,
}
RIDGE_2011 = {
    (2011, 8): 65.8, (2011, 9): 78.0, (2011, 10): 88.1, (2011, 11): 96.7,
    (2011, 12): 73.2, (2012, 1): 58.3, (2012, 2): 59.9,
}
RIDGE_2014 = {
    (2013, 10): 85.6, (2013, 11): 77.9, (2013, 12): 90.3, (2014, 1): 82.0,
    (2014, 2): 102.3, (2014, 3): 91.9, (2014, 4): 84.7, (2014, 5): 75.2,
}

GLOBAL_CAP = 251.0          # keep the authored 253.8 the unique record
CYCLE19_WINDOW_CAP = 248.0  # 1950-01 .. 1965-12, outside the ridge
CYCLE24_CAP_EARLY = 94.5    # 2009-01 .. 2012-12: first peak stays 96.7
CYCLE24_CAP_LATE = 100.5    # 2013-01 .. 2015-06: second peak stays 102.3
SMOOTHED_2000_TARGET = 120.8

NOISE_SCALE = 0.22
NOISE_MA = 7


def month_index(year, month):
    return year * 12 + (month - 1)


def month_range():
    lo = month_index(*MONTH_START)
    hi = month_index(*MONTH_END)
    return np.arange(lo, hi + 1)


def sidc_smooth(values):
    kernel = np.full(13, 1.0 / 12.0)
    kernel[0] = kernel[12] = 0.5 / 12.0
    return np.convolve(values, kernel, mode="valid")


def baseline(months):
    years = np.array(
        [YEAR0 + i for i in range(len(YEARLY))] + sorted(TAIL), dtype=float
    )
    vals = np.array(YEARLY + [TAIL[y] for y in sorted(TAIL)], dtype=float)
    interp = PchipInterpolator(years + 0.5, vals, extrapolate=True)
    t = months // 12 + ((months % 12) + 0.5) / 12.0
    return np.clip(interp(t), 0.0, None)


def correlated_noise(n, rng):
    white = rng.standard_normal(n + NOISE_MA - 1)
    kernel = np.hanning(NOISE_MA + 2)[1:-1]
    kernel /= kernel.sum()
    e = np.convolve(white, kernel, mode="valid")
    return e / e.std()


def rescale_window_to_smoothed_target(months, values):
    """Iteratively scale 1996-2003 so the 13-month-smoothed maximum around
    2000 lands on the target, tapering the scale at the window edges."""
    w_lo, w_hi = month_index(1996, 1), month_index(2003, 12)
    mask = (months >= w_lo) & (months <= w_hi)
    idx = np.flatnonzero(mask)
    taper = np.ones(idx.size)
    ramp = np.linspace(0.0, 1.0, 13)[1:]
    taper[:12] = ramp
    taper[-12:] = ramp[::-1]
    peak_lo, peak_hi = month_index(1999, 1), month_index(2001, 12)
    for _ in range(4):
        sm = sidc_smooth(values)
        sm_months = months[6:-6]
        sel = (sm_months >= peak_lo) & (sm_months <= peak_hi)
        current = sm[sel].max()
        gamma = SMOOTHED_2000_TARGET / current
        values[idx] *= 1.0 + (gamma - 1.0) * taper
    return values


def build_monthly(months, rng):
    base = baseline(months)
    noise = correlated_noise(months.size, rng)
    values = base * (1.0 + NOISE_SCALE * noise)
    values = np.clip(values, 0.0, GLOBAL_CAP)

    values = rescale_window_to_smoothed_target(months, values)

    lo19, hi19 = month_index(1950, 1), month_index(1965, 12)
    in19 = (months >= lo19) & (months <= hi19)
    values[in19] = np.minimum(values[in19], CYCLE19_WINDOW_CAP)

    lo24a, hi24a = month_index(2009, 1), month_index(2012, 12)
    early = (months >= lo24a) & (months <= hi24a)
    values[early] = np.minimum(values[early], CYCLE24_CAP_EARLY)
    late = months >= month_index(2013, 1)
    values[late] = np.minimum(values[late], CYCLE24_CAP_LATE)

    start = months[0]
    for ridge in (RIDGE_1957, RIDGE_2011, RIDGE_2014):
        for (yy, mm), v in ridge.items():
            values[month_index(yy, mm) - start] = v

    return np.round(np.clip(values, 0.0, None), 1)


def write_yearly(path):
    lines = [f"{YEAR0 + i};{float(v):.1f}" for i, v in enumerate(YEARLY)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_monthly(path, months, values):
    rows = []
    for t, v in zip(months, values):
        year, m0 = divmod(int(t), 12)
        dec = year + (m0 + 0.5) / 12.0
        rows.append(f"{year};{m0 + 1:02d};{dec:.3f};{v:.1f}")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def verify(months, values):
    assert len(YEARLY) == 2013 - 1700 + 1, len(YEARLY)
    assert np.all(values >= 0)
    start = months[0]

    def window(lo, hi):
        sel = (months >= lo) & (months <= hi)
        return months[sel], values[sel]

    # landmark 1: unique record at 1957-03 inside the 1950-1965 test window
    w_m, w_v = window(month_index(1950, 1), month_index(1965, 12))
    k = int(np.argmax(w_v))
    assert (w_m[k], w_v[k]) == (month_index(1957, 3), 253.8), (w_m[k], w_v[k])
    assert np.sort(w_v)[-2] < 253.8
    assert values.max() == 253.8

    # landmark 2: the two late-cycle peaks
    w_m, w_v = window(month_index(2009, 1), month_index(2012, 12))
    k = int(np.argmax(w_v))
    assert (w_m[k], w_v[k]) == (month_index(2011, 11), 96.7), (w_m[k], w_v[k])
    w_m, w_v = window(month_index(2009, 1), month_index(2015, 6))
    k = int(np.argmax(w_v))
    assert (w_m[k], w_v[k]) == (month_index(2014, 2), 102.3), (w_m[k], w_v[k])

    # landmark 3: smoothed maximum near 2000 close to the target
    sm = sidc_smooth(values)
    sm_months = months[6:-6]
    sel = (sm_months >= month_index(1999, 1)) & (sm_months <= month_index(2001, 12))
    sm_max = sm[sel].max()
    assert abs(sm_max - SMOOTHED_2000_TARGET) < 1.0, sm_max
    # and nothing elsewhere in the smoothed record beats the 1950s cycle
    assert sm.max() < 253.8

    print(f"  monthly rows: {values.size} ({months[0]//12}-{months[0]%12+1:02d} .. "
          f"{months[-1]//12}-{months[-1]%12+1:02d})")
    print(f"  record value: {values.max()} at 1957-03")
    print(f"  smoothed max near 2000: {sm_max:.2f}")


def main():
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "data"
    outdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)
    months = month_range()
    values = build_monthly(months, rng)
    verify(months, values)
    write_yearly(outdir / "ssn_yearly.dat")
    write_monthly(outdir / "ssn_monthly.dat", months, values)
    print(f"wrote {outdir / 'ssn_yearly.dat'} ({len(YEARLY)} rows)")
    print(f"wrote {outdir / 'ssn_monthly.dat'} ({values.size} rows)")


if __name__ == "__main__":
    main()
