"""Benchmark constants table (NPB conventions).

Everything the EP and FT kernels need to be comparable with published NAS
Parallel Benchmark results lives here: generator parameters, problem-class
sizes, operation-count formulas and the reference verification values.
Conventions follow the NPB 3.x sources (see CONVENTIONS_VERSION); op counts
for these two kernels are identical across 2.3 through 3.4.
"""

from __future__ import annotations

import math

CONVENTIONS_VERSION = "NPB-3.x"

# Linear congruential generator: state' = LCG_MULTIPLIER * state mod 2**46.
LCG_MULTIPLIER = 5 ** 13  # 1220703125
LCG_MODULUS = 1 << 46

# Default seeds for the two kernels.
EP_SEED = 271828183
FT_SEED = 314159265

# EP class -> log2 of the number of Gaussian pair candidates.
EP_CLASSES = {"S": 24, "W": 25, "A": 28, "B": 30, "C": 32}

# FT class -> (nx, ny, nz, iterations).
FT_CLASSES = {
    "S": (64, 64, 64, 6),
    "W": (128, 128, 32, 6),
    "A": (256, 256, 128, 6),
    "B": (512, 256, 256, 20),
}

# FT spectral evolution: each iteration multiplies mode k by
# exp(FT_AP * |k|**2) with centered integer frequencies.
FT_ALPHA = 1.0e-6
FT_AP = -4.0 * FT_ALPHA * math.pi * math.pi

# Number of grid samples folded into each per-iteration checksum.
FT_CHECKSUM_SAMPLES = 1024

EP_ANNULUS_BINS = 10

# Relative tolerance used when checking results against the reference values.
EP_VERIFY_RTOL = 1.0e-8
FT_VERIFY_RTOL = 1.0e-12


def ep_total_mop(log2_pairs: int) -> float:
    """Benchmark-defined work of an EP run, in Mop (one op per deviate drawn)."""
    return 2.0 ** (log2_pairs + 1) / 1.0e6


def ft_total_mop(nx: int, ny: int, nz: int, iterations: int) -> float:
    """Benchmark-defined work of an FT run, in Mop (NPB flop-count formula)."""
    ntotal = float(nx) * ny * nz
    ln = math.log(ntotal)
    per_point = 14.8157 + 7.19641 * ln + (5.23518 + 7.21113 * ln) * iterations
    return ntotal * per_point / 1.0e6


# Reference verification sums for EP (sum of accepted X and Y deviates),
# from the NPB reference implementation.
EP_REFERENCE_SUMS = {
    "S": (-3.247834652034740e3, -6.958407078382297e3),
    "W": (-2.863319731645753e3, -6.320053679109499e3),
    "A": (-4.295875165629892e3, -1.580732573678431e4),
    "B": (4.033815542441498e4, -2.660669192809235e4),
    "C": (4.764367927995374e4, -8.084072988043731e4),
}

# Reference per-iteration checksums for FT, from the NPB reference
# implementation (real, imag).
FT_REFERENCE_CHECKSUMS = {
    "S": (
        (5.546087004964e2, 4.845363331978e2),
        (5.546385409189e2, 4.865304269511e2),
        (5.546148406171e2, 4.883910722336e2),
        (5.545423607415e2, 4.901273169046e2),
        (5.544255039624e2, 4.917475857993e2),
        (5.542683411902e2, 4.932597244941e2),
    ),
    "W": (
        (5.673612178944e2, 5.293246849175e2),
        (5.631436885271e2, 5.282149986629e2),
        (5.594024089970e2, 5.270996558037e2),
        (5.560698047020e2, 5.260027904925e2),
        (5.530898991250e2, 5.249400845633e2),
        (5.504159734538e2, 5.239212247086e2),
    ),
    "A": (
        (5.046735008193e2, 5.114047905510e2),
        (5.059412319734e2, 5.098809666433e2),
        (5.069376896287e2, 5.098144042213e2),
        (5.077892868474e2, 5.101336130759e2),
        (5.085233095391e2, 5.104914655194e2),
        (5.091487099959e2, 5.107917842803e2),
    ),
    "B": (
        (5.177643571579e2, 5.077803458597e2),
        (5.154521291263e2, 5.088249431599e2),
        (5.146409228649e2, 5.096208912659e2),
        (5.142378756213e2, 5.101023387619e2),
        (5.139626667737e2, 5.103976610617e2),
        (5.137423460082e2, 5.105948019802e2),
        (5.135547056878e2, 5.107404165783e2),
        (5.133910925466e2, 5.108576573661e2),
        (5.132470705390e2, 5.109577278523e2),
        (5.131197729984e2, 5.110460304483e2),
        (5.130070319283e2, 5.111252433800e2),
        (5.129070537032e2, 5.111968077718e2),
        (5.128182883502e2, 5.112616233064e2),
        (5.127393733383e2, 5.113203605551e2),
        (5.126691062020e2, 5.113735928093e2),
        (5.126064276004e2, 5.114218460548e2),
        (5.125504076570e2, 5.114656139760e2),
        (5.125002331720e2, 5.115053595966e2),
        (5.124551951846e2, 5.115415130407e2),
        (5.124146770029e2, 5.115744692211e2),
    ),
}
