"""Free flag complexes over finite local rings and geodesic walks on Ã_2 complexes."""
__version__ = "0.1.0"

from .kernels import BACKEND
from .ring import LocalRing, parse_ring_spec, ring_make, smith_form
from .flags import FreeProjPlaneGraph, build_pfr2, build_pfr_d
from .complex import ColoredComplex, enumerate_geodesics, geodesic_power, link, power_link
from .building import LatticeClassBall, build_ball, stratify
from .cayley import build_cayley, enumerate_sp, load_or_build
from .spectral import eigensolve, spectrum_exact

__all__ = [
    "BACKEND",
    "ColoredComplex",
    "FreeProjPlaneGraph",
    "LatticeClassBall",
    "LocalRing",
    "build_ball",
    "build_cayley",
    "build_pfr2",
    "build_pfr_d",
    "eigensolve",
    "enumerate_geodesics",
    "enumerate_sp",
    "geodesic_power",
    "link",
    "load_or_build",
    "parse_ring_spec",
    "power_link",
    "ring_make",
    "smith_form",
    "spectrum_exact",
    "stratify",
]
