"""Star-set reachability verification for LSTM and CNN-LSTM classifiers."""

__version__ = "0.1.0"

from .activations import ActivationKind, RelaxationMode
from .errors import SeqStarError
from .layers import LayerSpec, LstmStateStars, SequenceStar
from .network import (
    NetworkSpec,
    SequenceTensor,
    forward,
    load_dataset,
    load_model,
    maxID,
    reach,
    save_dataset,
    save_model,
)
from .perturb import PerturbationSpec, build_star, delta_for
from .stars import (
    IntervalBox,
    Predicate,
    Star,
    StarUnion,
    affine_map,
    contains_point,
    hadamard_product,
    is_empty,
    minkowski_sum,
    range_of,
    shared_variable_sum,
    star_from_box,
)
from .verify import (
    CampaignReport,
    Verdict,
    check_local_robustness,
    falsify,
    run_campaign,
)

__all__ = [
    "ActivationKind",
    "CampaignReport",
    "IntervalBox",
    "LayerSpec",
    "LstmStateStars",
    "NetworkSpec",
    "PerturbationSpec",
    "Predicate",
    "RelaxationMode",
    "SeqStarError",
    "SequenceStar",
    "SequenceTensor",
    "Star",
    "StarUnion",
    "Verdict",
    "affine_map",
    "build_star",
    "check_local_robustness",
    "contains_point",
    "delta_for",
    "falsify",
    "forward",
    "hadamard_product",
    "is_empty",
    "load_dataset",
    "load_model",
    "maxID",
    "minkowski_sum",
    "range_of",
    "reach",
    "run_campaign",
    "save_dataset",
    "save_model",
    "shared_variable_sum",
    "star_from_box",
]
