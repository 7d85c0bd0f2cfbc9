"""Decoy and patch deployment planning for IoT networks.

Builds a three-layer attack model of a network, scores deployment vectors on
decoy fraction, interaction probability and residual cost, and searches the
deployment space with NSGA-II or exhaustively.
"""
from iotdefense.network import (
    DeploymentVector,
    IoTNetwork,
    NetworkSpec,
    SpecError,
    apply_deployment,
    build_network,
    decode,
    encode,
)
from iotdefense.metrics import Evaluator, FitnessTriple, analysis_metrics, evaluate
from iotdefense.optimizer import (
    DeploymentProblem,
    GAParams,
    ParetoFront,
    SpaceLimitError,
    accuracy_ratio,
    exhaustive_search,
    nsga2,
)
from iotdefense.scenarios import pacs_case_study, scaled_network, scenario

__version__ = "0.1.0"

__all__ = [
    "DeploymentProblem", "DeploymentVector", "Evaluator", "FitnessTriple", "GAParams", "IoTNetwork",
    "NetworkSpec", "ParetoFront", "SpaceLimitError", "SpecError", "accuracy_ratio", "analysis_metrics",
    "apply_deployment", "build_network", "decode", "encode", "evaluate", "exhaustive_search", "nsga2",
    "pacs_case_study", "scaled_network", "scenario",
]
