"""
shortfec: short-blocklength forward error correction toolkit.

Decoders (OSD, WAVA, CRC/TBCC flip decoding, polar SC/SCL, LDPC BP and
BP+OSD), finite-length benchmarks (bi-AWGN capacity, dispersion, normal
approximation), and a seeded Monte Carlo harness for codeword error
rate curves.
"""

import os

# the sandbox TBB is too old for numba; pick the built-in work queue
# before numba is imported anywhere (thread backend only, no effect on
# numerical results)
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

from . import bounds, channel, codes, convolutional, crc_tbcc, gf2, ldpc  # noqa: E402
from . import osd, polar, schemes, sim  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "bounds",
    "channel",
    "codes",
    "convolutional",
    "crc_tbcc",
    "gf2",
    "ldpc",
    "osd",
    "polar",
    "schemes",
    "sim",
    "__version__",
]
