"""MPNNs with normalized sum aggregation and their Lipschitz analysis."""

from .catalog import KINDS, CatalogFunction, inf_norm
from .lipschitz import (
    LipschitzBound,
    LipschitzReport,
    lipschitz_bound,
    lipschitz_bound_l1,
    setting2_growth_closed_form,
    signal_bounds,
    verify_lipschitz,
)
from .model import (
    MessageFunctionSpec,
    MessagePassingNetwork,
    MpnnLayer,
    MpnnSpec,
    aggregate,
    aggregate_graph,
    aggregate_graphon,
    forward,
    forward_signal,
    message_kernel,
    random_spec,
    readout,
    verify_commutation,
)

__all__ = [
    "KINDS",
    "CatalogFunction",
    "inf_norm",
    "LipschitzBound",
    "LipschitzReport",
    "lipschitz_bound",
    "lipschitz_bound_l1",
    "setting2_growth_closed_form",
    "signal_bounds",
    "verify_lipschitz",
    "MessageFunctionSpec",
    "MessagePassingNetwork",
    "MpnnLayer",
    "MpnnSpec",
    "aggregate",
    "aggregate_graph",
    "aggregate_graphon",
    "forward",
    "forward_signal",
    "message_kernel",
    "random_spec",
    "readout",
    "verify_commutation",
]
