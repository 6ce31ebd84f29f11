"""Smooth-operator quantum search: QCPA, QUSA and a Grover baseline.

Matrix-level pipelines, a unitary-to-gate synthesizer over {1-qubit, CX},
density-matrix simulation with depolarizing noise, and an experiment CLI.
"""

__version__ = "0.1.0"
