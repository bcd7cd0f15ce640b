"""Vector similarity search on a dimension-major block layout with
adaptive dimension pruning."""

from .bench import GroundTruth, RunReport, compute_ground_truth, gen_synthetic, recall_at_k
from .estimators import ExactNearestNeighbors, IvfNearestNeighbors
from .index import (FlatPartitioning, IvfIndex, exact_search, flat_build,
                    ivf_build, ivf_search, ivf_select_buckets, lloyd_kmeans)
from .kernels import (Metric, horizontal_distance, horizontal_distance_batch,
                      new_accumulator, vertical_accumulate, vertical_accumulate_selected)
from .layout import (Block, BlockMetadata, VectorCollection, compute_means,
                     from_blocks, to_blocks)
from .pruning import (AdsPruner, OrderCriteria, OrthogonalTransform, ads_should_prune,
                      apply_transform, bond_dimension_order, bond_should_prune,
                      generate_orthogonal)
from .search import (SearchParams, SearchStats, TopK, pruning_power_trace, search,
                     step_schedule)
from .storage import (BlockStore, FormatError, IvfSection, read_fvecs, read_ivecs,
                      read_pdx, write_fvecs, write_ivecs, write_pdx)

__version__ = "0.1.0"
