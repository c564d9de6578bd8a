"""Hierarchical publication-level classification of citation networks.

The pipeline: normalize direct-citation relatedness into a sparse directed
graph, maximize a resolution-parameterized cluster quality level by level
(bottom up, with small-area cleanup at each level), then label the resulting
areas with characteristic terms and report on the outcome.
"""

from .corpus import (
    EdgeList,
    LoadConfig,
    PublicationRecord,
    PublicationTable,
    UnknownIdPolicy,
    edges_from_array,
    load_citations,
    load_publications,
)
from .cpm import (
    Assignment,
    MetaGraph,
    coarsen,
    local_move_gain,
    multi_run_optimize,
    optimize,
    quality,
)
from .errors import ConfigError, DataError, StratumError
from .graph import (
    ComponentMap,
    NormalizedGraph,
    build_relatedness,
    connected_components,
    load_graph_cache,
    save_graph_cache,
)
from .hierarchy import (
    Hierarchy,
    HierarchyParams,
    PathTable,
    area_relatedness,
    build_hierarchy,
    eligible_set,
    reassign_small_areas,
)
from .labeling import (
    AreaLabelSet,
    LabelParams,
    extract_terms,
    label_hierarchy,
    relevance_scores,
    select_labels,
    term_similarity,
)

__version__ = "0.1.0"
