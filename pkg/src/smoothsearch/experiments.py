"""Experiment configuration, run reports and the search / noise-sweep / gate-count commands.

A config file is flat ``key = value`` text; ``#`` starts a comment and list
values are comma separated. Recognised keys and defaults::

    algorithms = qcpa,qusa,grover
    qubits = 3,4,5
    marked = sweep-all          # or an integer position 1..2^qubits
    p1 = 0.001                  # depolarizing probability after 1-qubit gates
    p2 = 0.001                  # depolarizing probability after CX gates
    scope = first-n             # or all
    noisy_gates = 2,4,6         # only read when scope = first-n
    shots = 10000
    seed = 2024
    convention = row-start      # or paper
    grover_iterations = auto    # or an integer
    synth_u = qft_family
    synth_f = qft_family
    synth_ut = qft_family
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import __version__
from .algorithms import build_circuit, expected_index, grover_iterations, recover_qcpa
from .circuits.gates import Circuit, gate_census
from .circuits.simulate import (
    NoiseModel,
    NoiseScope,
    diagonal_probabilities,
    evolve_density,
    sample_counts,
)
from .circuits.synthesis import SynthesisHint
from .numeric import bitstring_index
from .oracles import PermutationConvention

ALGORITHMS = ("qcpa", "qusa", "grover")
SWEEP_ALL = "sweep-all"


class ConfigError(ValueError):
    """Invalid experiment configuration; the CLI maps it to a usage error."""


def _split_list(value: str) -> list[str]:
    return [v.strip() for v in str(value).split(",") if v.strip()]


def _parse_int(key: str, value) -> int:
    try:
        return int(str(value).strip())
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def _parse_float(key: str, value) -> float:
    try:
        return float(str(value).strip())
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    algorithms: tuple[str, ...] = ALGORITHMS
    qubits: tuple[int, ...] = (3, 4, 5)
    marked: int | str = SWEEP_ALL
    p1: float = 0.001
    p2: float = 0.001
    scope: NoiseScope = NoiseScope.FIRST_N
    noisy_gates: tuple[int, ...] = (2, 4, 6)
    shots: int = 10000
    seed: int = 2024
    convention: PermutationConvention = PermutationConvention.ROW_START
    grover_iterations: int | str = "auto"
    synth_u: SynthesisHint = SynthesisHint.QFT_FAMILY
    synth_f: SynthesisHint = SynthesisHint.QFT_FAMILY
    synth_ut: SynthesisHint = SynthesisHint.QFT_FAMILY

    def __post_init__(self):
        algos = tuple(str(a).lower() for a in self.algorithms)
        for a in algos:
            if a not in ALGORITHMS:
                raise ConfigError(f"algorithms: unknown algorithm {a!r}")
        object.__setattr__(self, "algorithms", algos)
        qubits = tuple(int(q) for q in self.qubits)
        if any(q < 1 for q in qubits):
            raise ConfigError("qubits: every entry must be >= 1")
        object.__setattr__(self, "qubits", qubits)
        if self.marked != SWEEP_ALL:
            m = _parse_int("marked", self.marked)
            for q in qubits:
                if not 1 <= m <= 2**q:
                    raise ConfigError(f"marked: {m} outside 1..{2**q} for {q} qubits")
            object.__setattr__(self, "marked", m)
        for key in ("p1", "p2"):
            v = float(getattr(self, key))
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{key}: must lie in [0, 1], got {v}")
            object.__setattr__(self, key, v)
        try:
            object.__setattr__(self, "scope", NoiseScope.parse(self.scope))
            object.__setattr__(self, "convention", PermutationConvention.parse(self.convention))
            for key in ("synth_u", "synth_f", "synth_ut"):
                object.__setattr__(self, key, SynthesisHint.parse(getattr(self, key)))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        noisy = tuple(int(n) for n in self.noisy_gates)
        if any(n < 0 for n in noisy):
            raise ConfigError("noisy_gates: entries must be >= 0")
        object.__setattr__(self, "noisy_gates", noisy)
        if int(self.shots) < 1:
            raise ConfigError("shots: must be >= 1")
        object.__setattr__(self, "shots", int(self.shots))
        if int(self.seed) < 0:
            raise ConfigError("seed: must be non-negative")
        object.__setattr__(self, "seed", int(self.seed))
        if self.grover_iterations != "auto":
            k = _parse_int("grover_iterations", self.grover_iterations)
            if k < 0:
                raise ConfigError("grover_iterations: must be >= 0 or auto")
            object.__setattr__(self, "grover_iterations", k)

    # --- text form ---------------------------------------------------------

    def to_dict(self) -> dict[str, str]:
        """Every field rendered as the string a config file would hold."""
        def fmt(v):
            if isinstance(v, tuple):
                return ",".join(str(x) for x in v)
            if hasattr(v, "value"):
                return v.value
            return repr(v) if isinstance(v, float) else str(v)

        return {f.name: fmt(getattr(self, f.name)) for f in dataclasses.fields(self)}

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.to_dict().items())

    @classmethod
    def from_mapping(cls, values: dict[str, str], base: "ExperimentConfig | None" = None) -> "ExperimentConfig":
        base = base or cls()
        known = {f.name for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            key = key.strip().replace("-", "_")
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            if key == "algorithms":
                kwargs[key] = tuple(_split_list(raw))
            elif key in ("qubits", "noisy_gates"):
                kwargs[key] = tuple(_parse_int(key, v) for v in _split_list(raw))
            elif key in ("p1", "p2"):
                kwargs[key] = _parse_float(key, raw)
            elif key in ("shots", "seed"):
                kwargs[key] = _parse_int(key, raw)
            elif key == "marked":
                raw = str(raw).strip()
                kwargs[key] = raw if raw == SWEEP_ALL else _parse_int(key, raw)
            elif key == "grover_iterations":
                raw = str(raw).strip()
                kwargs[key] = raw if raw == "auto" else _parse_int(key, raw)
            else:
                kwargs[key] = str(raw).strip()
        return dataclasses.replace(base, **kwargs)

    @classmethod
    def from_text(cls, text: str, base: "ExperimentConfig | None" = None) -> "ExperimentConfig":
        values = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"config line {lineno}: expected key = value")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
        return cls.from_mapping(values, base)

    @classmethod
    def from_file(cls, path, base: "ExperimentConfig | None" = None) -> "ExperimentConfig":
        return cls.from_text(Path(path).read_text(), base)

    # --- helpers -----------------------------------------------------------

    def marked_positions(self, n_states: int) -> list[int]:
        if self.marked == SWEEP_ALL:
            return list(range(1, n_states + 1))
        return [int(self.marked)]

    def grover_k(self, n_states: int) -> int:
        if self.grover_iterations == "auto":
            return grover_iterations(n_states)
        return int(self.grover_iterations)

    def noise_cells(self) -> list[int | None]:
        """Noisy-gate counts swept; ``None`` stands for every gate noisy."""
        if self.scope is NoiseScope.ALL:
            return [None]
        return list(self.noisy_gates)

    def noise_model(self, noisy: int | None) -> NoiseModel:
        if noisy is None:
            return NoiseModel(self.p1, self.p2, NoiseScope.ALL, 0)
        return NoiseModel(self.p1, self.p2, NoiseScope.FIRST_N, noisy)


@dataclass
class RunReport:
    command: str
    config: ExperimentConfig
    cells: list[dict] = field(default_factory=list)
    counts: list[dict] = field(default_factory=list)
    census: list[dict] = field(default_factory=list)
    version: str = __version__

    @property
    def seed(self) -> int:
        return self.config.seed


# --- circuits and sampling ----------------------------------------------------------

@lru_cache(maxsize=None)
def _circuit(algorithm: str, qubits: int, s: int, conv, grover_k: int, hints: tuple) -> Circuit:
    return build_circuit(algorithm, 2**qubits, s, conv, grover_k, *hints)


def circuit_for(config: ExperimentConfig, algorithm: str, qubits: int, s: int) -> Circuit:
    hints = (config.synth_u, config.synth_f, config.synth_ut)
    return _circuit(algorithm, qubits, s, config.convention, config.grover_k(2**qubits), hints)


def cell_rng(seed: int, qubits: int, noisy: int | None, s: int) -> np.random.Generator:
    """Stream for one (qubits, noisy-gate count, s) cell.

    The algorithm is deliberately not part of the key: the three algorithms
    in a cell share their uniforms, so accuracy differences between them are
    not blurred by independent sampling error.
    """
    scope_code = 1 if noisy is None else 0
    return np.random.default_rng([seed, scope_code, qubits, noisy or 0, s])


def recovered_position(algorithm: str, index0: int, n_states: int, conv) -> int:
    if algorithm == "qcpa":
        return recover_qcpa(index0 + 1, n_states, conv)
    return index0 + 1


def _noisy_label(noisy: int | None) -> int | str:
    return "all" if noisy is None else noisy


def _run_cell(config: ExperimentConfig, algorithm: str, qubits: int, noisy: int | None) -> tuple[dict, list[dict]]:
    n_states = 2**qubits
    nm = config.noise_model(noisy)
    per_s = []
    raw = []
    for s in config.marked_positions(n_states):
        c = circuit_for(config, algorithm, qubits, s)
        probs = diagonal_probabilities(evolve_density(c, nm))
        counts = sample_counts(probs, config.shots, cell_rng(config.seed, qubits, noisy, s), qubits)
        target = expected_index(algorithm, s, n_states, config.convention)
        hits = sum(k for bits, k in counts.items() if bitstring_index(bits) == target)
        per_s.append((100.0 * hits / config.shots, s))
        raw.append({"algorithm": algorithm, "qubits": qubits, "noisy_gates": _noisy_label(noisy),
                    "s": s, "counts": counts})
    worst_acc, worst_s = min(per_s)
    cell = {
        "algorithm": algorithm,
        "qubits": qubits,
        "noisy_gates": _noisy_label(noisy),
        "accuracy": round(float(np.mean([a for a, _ in per_s])), 6),
        "worst_accuracy": round(worst_acc, 6),
        "worst_s": worst_s,
    }
    return cell, raw


def _run_cells(config: ExperimentConfig, jobs: int) -> tuple[list[dict], list[dict]]:
    keys = [(a, q, n) for a in config.algorithms for q in config.qubits for n in config.noise_cells()]
    # circuits are built up front so worker threads only read the cache
    for a, q, _ in {(a, q, None) for a, q, _ in keys}:
        for s in config.marked_positions(2**q):
            circuit_for(config, a, q, s)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda k: _run_cell(config, *k), keys))
    else:
        results = [_run_cell(config, *k) for k in keys]
    cells = [r[0] for r in results]
    raw = [row for r in results for row in r[1]]
    return cells, raw


def _census_row(config: ExperimentConfig, algorithm: str, qubits: int) -> dict:
    """Gate census of the largest circuit over the marked positions in play."""
    best = None
    for s in config.marked_positions(2**qubits):
        cen = gate_census(circuit_for(config, algorithm, qubits, s))
        if best is None or cen["total"] > best[0]["total"]:
            best = (cen, s)
    cen, s = best
    row = {"algorithm": algorithm, "qubits": qubits, "s": s, **cen}
    row["grover_iterations"] = config.grover_k(2**qubits) if algorithm == "grover" else 0
    return row


# --- commands ---------------------------------------------------------------------

def cmd_search(config: ExperimentConfig) -> RunReport:
    """One algorithm at one (N, s); noiseless when p1 = p2 = 0."""
    if len(config.algorithms) != 1:
        raise ConfigError("search needs exactly one algorithm")
    if len(config.qubits) != 1:
        raise ConfigError("search needs exactly one qubit count")
    if config.marked == SWEEP_ALL:
        raise ConfigError("search needs an explicit marked position")
    if config.scope is NoiseScope.FIRST_N and len(config.noisy_gates) > 1:
        raise ConfigError("search takes at most one noisy-gate count")
    algorithm, qubits, s = config.algorithms[0], config.qubits[0], int(config.marked)
    noisy = None if config.scope is NoiseScope.ALL else (config.noisy_gates[0] if config.noisy_gates else 0)
    cells, raw = _run_cells(dataclasses.replace(config, noisy_gates=() if noisy is None else (noisy,)), 1)
    counts = raw[0]["counts"]
    top = max(sorted(counts), key=lambda b: counts[b])
    cells[0]["measured"] = top
    cells[0]["recovered_s"] = recovered_position(algorithm, bitstring_index(top), 2**qubits, config.convention)
    return RunReport("search", config, cells, raw, [_census_row(config, algorithm, qubits)])


def cmd_sweep_noise(config: ExperimentConfig, jobs: int = 1) -> RunReport:
    """Accuracy table over algorithms x qubits x noisy-gate counts."""
    if config.scope is NoiseScope.FIRST_N and not config.noisy_gates:
        raise ConfigError("sweep-noise with scope first-n needs noisy_gates")
    cells, raw = _run_cells(config, max(1, int(jobs)))
    census = [_census_row(config, a, q) for a in config.algorithms for q in config.qubits]
    return RunReport("sweep-noise", config, cells, raw, census)


def cmd_gate_count(config: ExperimentConfig) -> RunReport:
    census = [_census_row(config, a, q) for a in config.algorithms for q in config.qubits]
    return RunReport("gate-count", config, [], [], census)
