"""Max-min packing of synthetic identity embeddings on the unit hypersphere."""

from ._kernels import BACKEND
from .errors import HyperpackError
from .gallery import Gallery, ManifoldSpec, nearest_gallery, synthesize_gallery, validate_gallery
from .metrics import known_optima_lookup, packing_report, simplex_optimum
from .optim import Adam, LrSchedule, lr_at
from .packing import (
    GallerySubset,
    PackingConfig,
    PackingRun,
    TraceRecord,
    UniformRandom,
    check_gradient,
    init_references,
    optimize,
    regularization_term,
    verify_unbiasedness,
)
from .sampling import SampleSpec, generate_manifest, intra_class_stats, perturb_reference
from .sphere import cosine_distance, normalize, pairwise_min, random_unit

__version__ = "0.1.0"
