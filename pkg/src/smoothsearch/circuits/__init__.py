"""Gate lists, synthesis and simulation."""

from .gates import CX, SINGLE, Circuit, GateOp, cx, gate_census, simplify, single
from .simulate import NoiseModel, NoiseScope, ShotResult, evolve_density, run_noisy
from .synthesis import SynthesisHint, synthesize

__all__ = [
    "CX", "SINGLE", "Circuit", "GateOp", "cx", "gate_census", "simplify", "single",
    "NoiseModel", "NoiseScope", "ShotResult", "evolve_density", "run_noisy",
    "SynthesisHint", "synthesize",
]
