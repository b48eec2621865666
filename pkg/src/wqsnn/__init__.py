"""Clock-driven spiking neural network simulation on work queues."""

from .adjacency import AdjacencyList, build_adjacency, plan_jobs, expand_jobs, sorted_random
from .analysis import (MemoryBreakdown, Recorder, SpikeRaster, firing_rate, memory_estimate,
                       rate_retention, scaling_constant)
from .engine import InvariantViolation, Simulation, SpikeRing
from .models import Model, NeuronView, SynapseView, build_model
from .network import (ConnectivitySpec, DescriptorError, NetworkDescriptor, PopulationSpec,
                      parse_descriptor, validate)

__version__ = "0.1.0"

__all__ = [
    "AdjacencyList", "ConnectivitySpec", "DescriptorError", "InvariantViolation",
    "MemoryBreakdown", "Model", "NetworkDescriptor", "NeuronView", "PopulationSpec", "Recorder",
    "Simulation", "SpikeRaster", "SpikeRing", "SynapseView", "build_adjacency", "build_model",
    "expand_jobs", "firing_rate", "memory_estimate", "parse_descriptor", "plan_jobs",
    "rate_retention", "scaling_constant", "sorted_random", "validate",
]
