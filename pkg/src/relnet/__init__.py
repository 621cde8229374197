"""relnet: relational graphs translated into masked fixed-width MLPs.

The package builds graphs (random, scale-free, community-composed, imported
connectomes), maps them onto block-masked multilayer perceptrons through
rounds of message exchange, trains those networks on image-classification
data, and sweeps structural parameters into analysis-ready CSV grids.
"""

from .connectome import (
    ConnectomeSource,
    import_connectome,
    matched_er,
    sample_subgraph,
)
from .datasets import Dataset, batch_iter, load_cifar10, synthetic_blobs
from .errors import (
    DisconnectedGraph,
    EdgeSaturation,
    FitError,
    FormatError,
    InvalidNodeId,
    NumericError,
    RelnetError,
    ShapeError,
    TooLarge,
    TooManyCommunities,
    TooManyNodes,
    TooSmall,
    UndefinedMetric,
)
from .generators import (
    GenerationInfo,
    GeneratorSpec,
    compose_communities,
    gen_complete,
    gen_er,
    gen_static_sf,
    generate,
    generate_with_info,
)
from .graphs import (
    Graph,
    GraphMetrics,
    avg_path_length,
    clustering_coefficient,
    compute_metrics,
    connected_components,
    cross_density,
    degree_stats,
    from_edge_pairs,
    induced_subgraph,
    largest_component,
    modularity,
    read_edge_list,
    write_edge_list,
)
from .model import (
    BlockPartition,
    LayerMask,
    MlpModel,
    build_mask,
    forward,
    init_model,
    load_checkpoint,
    partition_width,
    save_checkpoint,
)
from .seeding import child_seed, splitmix64
from .sweep import (
    CorrelationReport,
    ExperimentRecord,
    SweepSpec,
    aggregate,
    correlation_report,
    read_records_csv,
    run_sweep,
    write_records_csv,
)
from .training import (
    EvalResult,
    SgdState,
    TrainConfig,
    evaluate,
    loss_and_grads,
    lr_at,
    sgd_step,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "BlockPartition",
    "ConnectomeSource",
    "CorrelationReport",
    "Dataset",
    "DisconnectedGraph",
    "EdgeSaturation",
    "EvalResult",
    "ExperimentRecord",
    "FitError",
    "FormatError",
    "GenerationInfo",
    "GeneratorSpec",
    "Graph",
    "GraphMetrics",
    "InvalidNodeId",
    "LayerMask",
    "MlpModel",
    "NumericError",
    "RelnetError",
    "SgdState",
    "ShapeError",
    "SweepSpec",
    "TooLarge",
    "TooManyCommunities",
    "TooManyNodes",
    "TooSmall",
    "TrainConfig",
    "UndefinedMetric",
    "aggregate",
    "avg_path_length",
    "batch_iter",
    "build_mask",
    "child_seed",
    "clustering_coefficient",
    "compose_communities",
    "compute_metrics",
    "connected_components",
    "correlation_report",
    "cross_density",
    "degree_stats",
    "evaluate",
    "forward",
    "from_edge_pairs",
    "gen_complete",
    "gen_er",
    "gen_static_sf",
    "generate",
    "generate_with_info",
    "import_connectome",
    "induced_subgraph",
    "init_model",
    "largest_component",
    "load_checkpoint",
    "load_cifar10",
    "loss_and_grads",
    "lr_at",
    "matched_er",
    "modularity",
    "partition_width",
    "read_edge_list",
    "read_records_csv",
    "run_sweep",
    "sample_subgraph",
    "save_checkpoint",
    "sgd_step",
    "splitmix64",
    "synthetic_blobs",
    "train",
    "write_edge_list",
    "write_records_csv",
]
