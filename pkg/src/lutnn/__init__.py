"""Trainable look-up-table networks with exact discrete execution.

The toolkit trains relaxed Boolean networks by gradient descent, then
discretizes them into exact LUT netlists whose integer evaluation
reproduces the training-time discrete accuracy bit for bit.
"""

from .datasets import Dataset, load_csv, load_idx, save_csv, split, synth_heterogeneous
from .encoder import (
    RHO_IMAGE,
    RHO_TABULAR,
    ThresholdPlan,
    encode_hard,
    encode_soft,
    fit_distributive,
    fit_uniform,
    realize_thresholds,
)
from .hadamard import MAX_ARITY, LutTable, WalshCoeffs, fwht, lut_to_theta, theta_to_lut
from .netlist import (
    Netlist,
    NetlistParseError,
    compile_network,
    dumps,
    encode_inputs,
    eval_bitpacked,
    eval_reference,
    export_netlist,
    import_netlist,
    loads,
    pack_bits,
    predict,
    unpack_bits,
)
from .network import (
    EncoderSpec,
    LayerSpec,
    Network,
    NetworkConfig,
    OptimizerSpec,
    TrainMetrics,
    TrainingDiverged,
    accuracy_discrete,
    accuracy_relaxed,
    build_network,
    discretization_gap,
    forward_relaxed,
    parameter_count,
    predict_discretized,
    predict_relaxed,
    train,
)
from .neurons import (
    GATE_NAME_BY_INT,
    GATE_NAMES,
    GATE_TABLES,
    discretize,
    discretize_layer,
    dlgn_residual_c,
    residual_init,
)
from .oracle import brute_nearest_lut, dense_transform, enumerate_luts, finite_diff

__all__ = [
    "Dataset",
    "EncoderSpec",
    "GATE_NAMES",
    "GATE_NAME_BY_INT",
    "GATE_TABLES",
    "LayerSpec",
    "LutTable",
    "MAX_ARITY",
    "Netlist",
    "NetlistParseError",
    "Network",
    "NetworkConfig",
    "OptimizerSpec",
    "RHO_IMAGE",
    "RHO_TABULAR",
    "ThresholdPlan",
    "TrainMetrics",
    "TrainingDiverged",
    "WalshCoeffs",
    "accuracy_discrete",
    "accuracy_relaxed",
    "brute_nearest_lut",
    "build_network",
    "compile_network",
    "dense_transform",
    "discretization_gap",
    "discretize",
    "discretize_layer",
    "dlgn_residual_c",
    "dumps",
    "encode_hard",
    "encode_inputs",
    "encode_soft",
    "enumerate_luts",
    "eval_bitpacked",
    "eval_reference",
    "export_netlist",
    "finite_diff",
    "fit_distributive",
    "fit_uniform",
    "forward_relaxed",
    "fwht",
    "import_netlist",
    "load_csv",
    "load_idx",
    "loads",
    "lut_to_theta",
    "pack_bits",
    "parameter_count",
    "predict",
    "predict_discretized",
    "predict_relaxed",
    "realize_thresholds",
    "residual_init",
    "save_csv",
    "split",
    "synth_heterogeneous",
    "theta_to_lut",
    "train",
    "unpack_bits",
]
