"""Multiscale simplicial flat norm of planar integral 1-currents."""
from .geom import GeometryError, PLCurrent, PLRegion, dilate, filler_area_bound, filler_region, pl_boundary, region_boundary
from .forms import PolyForm, pair
from .complex import Chain, Complex2, ComplexError, apply_boundary, boundary_matrix, build_complex, chain_mass, regularity
from .flatlp import FlatNormResult, flat_norm_decompose, formulate, simplicial_flat_distance, solve, sweep
from .triangulate import PSLG, localize, refine
from .approx import CurveSpec, approximate_curve
from .deform import CenterChoice, DeformCertificate, deform_currents
from .pipeline import embed_chains, gen_ngon_disk, gen_strip

__version__ = "0.1.0"
