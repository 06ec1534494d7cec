from .config import TrainConfig, set_debug
from .errors import (
    NLGNNError, ShapeError, ConfigError, ContractError, IngestionError, SplitError,
    GenerationError, MetricError, TrainingError,
)
from .tensor import Tensor, backward, no_grad, parameter
from .graph_data import Graph, Split, Permutation, DatasetStats
from .data_source import (
    GraphSourceManager, get_graph_source_manager, get_graph, load_graph, load_manifest, write_graph,
)
from .synthetic import generate_synthetic
from .homophily import homophily, reconnected_homophily, dataset_statistics, label_run_length
from .splits import split_nodes
from .model import ModelConfig, ModelParams, init_model, forward, save_params, load_params
from .training import RunResult, train, evaluate_mean, categorize_dataset, grid_search
from .bench import BenchReport, bench_runtime, scaling_experiment, export_sorted
from .rich_output import ReportPrinter

__version__ = "0.1.0"

__all__ = [
    'TrainConfig',
    'set_debug',
    'NLGNNError',
    'ShapeError',
    'ConfigError',
    'ContractError',
    'IngestionError',
    'SplitError',
    'GenerationError',
    'MetricError',
    'TrainingError',
    'Tensor',
    'backward',
    'no_grad',
    'parameter',
    'Graph',
    'Split',
    'Permutation',
    'DatasetStats',
    'GraphSourceManager',
    'get_graph_source_manager',
    'get_graph',
    'load_graph',
    'load_manifest',
    'write_graph',
    'generate_synthetic',
    'homophily',
    'reconnected_homophily',
    'dataset_statistics',
    'label_run_length',
    'split_nodes',
    'ModelConfig',
    'ModelParams',
    'init_model',
    'forward',
    'save_params',
    'load_params',
    'RunResult',
    'train',
    'evaluate_mean',
    'categorize_dataset',
    'grid_search',
    'BenchReport',
    'bench_runtime',
    'scaling_experiment',
    'export_sorted',
    'ReportPrinter',
]
