from .base import FieldStore, Model, NeuronView, SynapseView
from .bench import (BrunelPlus, Brunel, PingPong, Vogels, build_brunel, build_brunel_plus,
                    build_model, build_pingpong, build_vogels)
from .lif import LifModel, LifParams, lif_receive, lif_update, poisson_update
from .stdp import StdpParams, stdp_synapse_update

__all__ = [
    "Brunel", "BrunelPlus", "FieldStore", "LifModel", "LifParams", "Model", "NeuronView",
    "PingPong", "StdpParams", "SynapseView", "Vogels", "build_brunel", "build_brunel_plus",
    "build_model", "build_pingpong", "build_vogels", "lif_receive", "lif_update",
    "poisson_update", "stdp_synapse_update",
]
