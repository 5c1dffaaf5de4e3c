#!/usr/bin/env python3
"""Writes data/synthetic_spectrum.csv, a stand-in absorption spectrum.

The values are not measured: a weak continuum plus Gaussian bands in
log-wavelength at typical atmospheric band positions, capped at 1.
"""
import math
import pathlib

# centre (um), width (log10 units), peak
BANDS = [
    (0.76, 0.004, 0.6), (0.94, 0.02, 0.5), (1.13, 0.02, 0.45), (1.38, 0.025, 0.9),
    (1.87, 0.025, 0.9), (2.7, 0.03, 0.95), (4.3, 0.02, 1.0), (6.3, 0.06, 1.05),
    (9.6, 0.01, 0.5), (15.0, 0.04, 0.4), (35.0, 0.08, 1.0), (80.0, 0.3, 1.1),
]


def kappa(log_w, lo, hi):
    k = 0.03 + 0.02 * (log_w - lo) / (hi - lo)
    for centre, width, peak in BANDS:
        k += peak * math.exp(-0.5 * ((log_w - math.log10(centre)) / width) ** 2)
    return min(k, 1.0)


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "synthetic_spectrum.csv"
    lines = [
        "# Synthetic stand-in absorption spectrum for tests and examples.",
        "# Not measured data: a continuum plus smooth Gaussian bands placed",
        "# at typical atmospheric band positions. Generated by",
        "# tools/make_synthetic_spectrum.py.",
        "# columns: wavelength_um, kappa",
    ]
    n, lo, hi = 400, math.log10(0.25), math.log10(300.0)
    for k in range(n):
        lw = lo + (hi - lo) * k / (n - 1)
        lines.append(f"{10 ** lw:.6g},{kappa(lw, lo, hi):.4f}")
    out.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
