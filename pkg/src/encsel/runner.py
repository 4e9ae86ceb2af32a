"""Execute (instance x encoding) jobs under a cutoff and record runtimes.

Three pluggable backends: an external grounder/solver invoked as a
subprocess, the built-in exact hamiltonicity oracle, and a hermetic
synthetic model that maps (encoding, instance, seed) to a deterministic
runtime so the whole pipeline can be exercised without a solver.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import math
import random
import shlex
import subprocess
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .encodings import ENCODING_IDS, render_program
from .errors import DataError, SchemaError, ValidationError
from .graph import DirectedGraph, emit_facts, hamiltonian_cycle

log = logging.getLogger(__name__)

SOLVED_STATUSES = ("SAT", "UNSAT")
STATUSES = ("SAT", "UNSAT", "TIMEOUT", "ERROR")

EXTERNAL = "external-asp"
REFERENCE = "reference-oracle"
SYNTHETIC = "synthetic"

DEFAULT_GRACE_S = 5.0

# Synthetic runtime model: runtime = scale * arcs**alpha * exp(N(0, sigma)).
# The per-encoding (scale, alpha) pairs are staggered so that which encoding
# is fastest, and which encodings time out, both vary with instance size.
DEFAULT_SYNTHETIC_ALPHAS = (3.2, 1.25, 2.6, 1.65, 2.1, 1.45)
DEFAULT_SYNTHETIC_CROSSOVERS = (75.0, 240.0, 105.0, 185.0, 140.0, 215.0)
DEFAULT_SYNTHETIC_SCALES = tuple(
    200.0 / (crossover**alpha)
    for alpha, crossover in zip(DEFAULT_SYNTHETIC_ALPHAS, DEFAULT_SYNTHETIC_CROSSOVERS)
)
DEFAULT_SYNTHETIC_SIGMA = 0.5


@dataclass(frozen=True)
class RunOutcome:
    """Result of one solve call.

    TIMEOUT outcomes carry runtime_s equal to the cutoff; solved outcomes
    stay strictly below it.  `detail` holds captured output for ERROR
    outcomes and is not persisted.
    """

    status: str
    runtime_s: float
    detail: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValidationError(f"unknown status {self.status!r}")
        if self.runtime_s < 0:
            raise ValidationError("runtime must be >= 0")

    @property
    def solved(self) -> bool:
        return self.status in SOLVED_STATUSES


@dataclass(frozen=True)
class BackendSpec:
    """How to run one job: external command, built-in oracle, or synthetic."""

    kind: str
    command_template: str = ""
    seed: int = 0
    synthetic_scales: tuple[float, ...] = DEFAULT_SYNTHETIC_SCALES
    synthetic_alphas: tuple[float, ...] = DEFAULT_SYNTHETIC_ALPHAS
    synthetic_sigma: float = DEFAULT_SYNTHETIC_SIGMA

    def __post_init__(self):
        if self.kind not in (EXTERNAL, REFERENCE, SYNTHETIC):
            raise ValidationError(f"unknown backend kind {self.kind!r}")
        if self.kind == EXTERNAL:
            if "{program}" not in self.command_template:
                raise ValidationError("command template needs a {program} placeholder")
            if "{cutoff}" not in self.command_template:
                raise ValidationError("command template needs a {cutoff} placeholder")
        if len(self.synthetic_scales) != len(self.synthetic_alphas):
            raise ValidationError("synthetic scales and alphas must pair up")


def synthetic_runtime(
    backend: BackendSpec, enc: int, instance: DirectedGraph
) -> float:
    """Deterministic pre-clip runtime of the synthetic model."""
    if not 1 <= enc <= len(backend.synthetic_scales):
        raise ValidationError(f"no synthetic profile for encoding {enc}")
    scale = backend.synthetic_scales[enc - 1]
    alpha = backend.synthetic_alphas[enc - 1]
    basis = f"{enc}|{backend.seed}|".encode() + emit_facts(instance).encode()
    digest = hashlib.sha256(basis).digest()
    rng = random.Random(int.from_bytes(digest[:8], "big"))
    noise = rng.gauss(0.0, backend.synthetic_sigma)
    return scale * float(instance.arc_count) ** alpha * math.exp(noise)


def _parse_solver_output(stdout: str, returncode: int) -> Optional[str]:
    for line in stdout.splitlines():
        if "UNSATISFIABLE" in line:
            return "UNSAT"
    for line in stdout.splitlines():
        if "SATISFIABLE" in line:
            return "SAT"
    if returncode == 20:
        return "UNSAT"
    if returncode in (10, 30):
        return "SAT"
    return None


def _solve_external(
    backend: BackendSpec,
    enc: int,
    instance: DirectedGraph,
    cutoff: float,
    grace: float,
) -> RunOutcome:
    program = render_program(enc, instance)
    cutoff_text = str(int(cutoff)) if float(cutoff).is_integer() else str(cutoff)
    with tempfile.NamedTemporaryFile(
        "w", suffix=".lp", prefix="encsel_", delete=False
    ) as fh:
        fh.write(program)
        path = fh.name
    try:
        command = backend.command_template.format(program=path, cutoff=cutoff_text)
        argv = shlex.split(command)
        start = time.perf_counter()
        try:
            proc = subprocess.Popen(
                argv,
                stdout=subprocess.PIPE,
                stderr=subprocess.STDOUT,
                text=True,
            )
        except OSError as exc:
            return RunOutcome("ERROR", 0.0, detail=f"spawn failed: {exc}")
        try:
            stdout, _ = proc.communicate(timeout=cutoff)
        except subprocess.TimeoutExpired:
            proc.terminate()
            try:
                proc.communicate(timeout=grace)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.communicate()
            return RunOutcome("TIMEOUT", cutoff)
        elapsed = time.perf_counter() - start
        if elapsed >= cutoff:
            return RunOutcome("TIMEOUT", cutoff)
        status = _parse_solver_output(stdout or "", proc.returncode)
        if status is None:
            return RunOutcome(
                "ERROR",
                min(elapsed, cutoff),
                detail=f"exit {proc.returncode}; output: {(stdout or '')[-2000:]}",
            )
        return RunOutcome(status, elapsed)
    finally:
        Path(path).unlink(missing_ok=True)


def solve_one(
    backend: BackendSpec,
    enc: int,
    instance: DirectedGraph,
    cutoff: float,
    grace: float = DEFAULT_GRACE_S,
) -> RunOutcome:
    """Run one (encoding, instance) job under `cutoff` seconds."""
    if cutoff <= 0:
        raise ValidationError("cutoff must be positive")
    if backend.kind == SYNTHETIC:
        runtime = synthetic_runtime(backend, enc, instance)
        if runtime >= cutoff:
            return RunOutcome("TIMEOUT", cutoff)
        return RunOutcome("SAT", runtime)
    if backend.kind == REFERENCE:
        start = time.perf_counter()
        witness = hamiltonian_cycle(instance)
        elapsed = time.perf_counter() - start
        if elapsed >= cutoff:
            return RunOutcome("TIMEOUT", cutoff)
        return RunOutcome("SAT" if witness is not None else "UNSAT", elapsed)
    return _solve_external(backend, enc, instance, cutoff, grace)


def penalized_runtime(
    row: Mapping[int, RunOutcome], cutoff: float
) -> dict[int, float]:
    """Per-encoding penalized runtimes for one complete instance row.

    Solved cells keep their runtime; with k timeouts in the row, every
    timed-out cell receives cutoff * (1 + k).  ERROR cells get the same
    unsolved surrogate (they are excluded from training and evaluation
    anyway, but the map must stay total and finite).
    """
    k = sum(1 for outcome in row.values() if outcome.status == "TIMEOUT")
    return {
        enc: outcome.runtime_s if outcome.solved else cutoff * (1 + k)
        for enc, outcome in row.items()
    }


@dataclass
class PerformanceMatrix:
    """Run outcomes and penalized runtimes per (instance, encoding)."""

    cutoff_s: float
    encoding_ids: tuple[int, ...]
    cells: dict[tuple[str, int], RunOutcome] = field(default_factory=dict)
    penalized: dict[tuple[str, int], float] = field(default_factory=dict)

    @property
    def instance_ids(self) -> tuple[str, ...]:
        return tuple(sorted({inst for inst, _ in self.cells}))

    def add_row(self, instance_id: str, outcomes: Mapping[int, RunOutcome]) -> None:
        if set(outcomes) != set(self.encoding_ids):
            raise ValidationError(
                f"row for {instance_id} must cover encodings {self.encoding_ids}"
            )
        for enc, outcome in outcomes.items():
            if outcome.status == "TIMEOUT" and outcome.runtime_s != self.cutoff_s:
                raise ValidationError("TIMEOUT outcomes must carry the cutoff")
            if outcome.solved and outcome.runtime_s >= self.cutoff_s:
                raise ValidationError("solved outcomes must stay below the cutoff")
        pens = penalized_runtime(outcomes, self.cutoff_s)
        for enc, outcome in outcomes.items():
            self.cells[(instance_id, enc)] = outcome
            self.penalized[(instance_id, enc)] = pens[enc]

    def row(self, instance_id: str) -> dict[int, RunOutcome]:
        return {enc: self.cells[(instance_id, enc)] for enc in self.encoding_ids}

    def missing_pairs(self) -> list[tuple[str, int]]:
        return [
            (inst, enc)
            for inst in self.instance_ids
            for enc in self.encoding_ids
            if (inst, enc) not in self.cells
        ]

    def require_complete(self) -> None:
        missing = self.missing_pairs()
        if missing:
            raise DataError(f"matrix incomplete; missing cells: {missing[:10]}")

    def error_cells(self) -> list[tuple[str, int]]:
        return sorted(k for k, v in self.cells.items() if v.status == "ERROR")


def run_matrix(
    backend: BackendSpec,
    instances: Sequence[tuple[str, DirectedGraph]],
    encodings: Sequence[int] = ENCODING_IDS,
    cutoff: float = 200.0,
    workers: int = 1,
    grace: float = DEFAULT_GRACE_S,
) -> PerformanceMatrix:
    """Fill the full (instance x encoding) matrix.

    Jobs are independent; results are merged by key, so the matrix does not
    depend on worker count or completion order.
    """
    if workers < 1:
        raise ValidationError("workers must be >= 1")
    encodings = tuple(encodings)
    jobs = [(inst_id, graph, enc) for inst_id, graph in instances for enc in encodings]

    def run_job(job):
        inst_id, graph, enc = job
        outcome = solve_one(backend, enc, graph, cutoff, grace)
        log.info(
            "job instance=%s encoding=%d status=%s runtime=%.6f",
            inst_id, enc, outcome.status, outcome.runtime_s,
        )
        return (inst_id, enc), outcome

    results: dict[tuple[str, int], RunOutcome] = {}
    if workers == 1:
        for job in jobs:
            key, outcome = run_job(job)
            results[key] = outcome
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for key, outcome in pool.map(run_job, jobs):
                results[key] = outcome

    matrix = PerformanceMatrix(cutoff_s=cutoff, encoding_ids=encodings)
    for inst_id, _ in instances:
        matrix.add_row(inst_id, {enc: results[(inst_id, enc)] for enc in encodings})
    errors = matrix.error_cells()
    if errors:
        log.warning("%d ERROR cells: %s", len(errors), errors[:10])
    return matrix


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

MATRIX_COLUMNS = (
    "instance_id",
    "encoding_id",
    "status",
    "runtime_s",
    "penalized_s",
    "cutoff_s",
)


def format_seconds(value: float) -> str:
    """Exact decimal serialization with at least six fractional digits."""
    text = repr(float(value))
    if "e" in text or "E" in text or "." not in text:
        if "e" in text or "E" in text:
            return text  # extreme magnitudes keep the exact exponent form
        text += ".0"
    head, _, frac = text.partition(".")
    return f"{head}.{frac.ljust(6, '0')}"


def save_matrix(matrix: PerformanceMatrix, path: Path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MATRIX_COLUMNS)
        for inst in matrix.instance_ids:
            for enc in matrix.encoding_ids:
                outcome = matrix.cells[(inst, enc)]
                writer.writerow(
                    [
                        inst,
                        enc,
                        outcome.status,
                        format_seconds(outcome.runtime_s),
                        format_seconds(matrix.penalized[(inst, enc)]),
                        format_seconds(matrix.cutoff_s),
                    ]
                )


def load_matrix(path: Path) -> PerformanceMatrix:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise SchemaError("matrix file is empty (missing header)") from None
        if header != MATRIX_COLUMNS:
            missing = [c for c in MATRIX_COLUMNS if c not in header]
            raise SchemaError(
                f"matrix header {list(header)} does not match; missing {missing}"
            )
        cells: dict[tuple[str, int], RunOutcome] = {}
        penalized: dict[tuple[str, int], float] = {}
        cutoff = None
        for row in reader:
            inst, enc_text, status, runtime, pen, cut = row
            enc = int(enc_text)
            cells[(inst, enc)] = RunOutcome(status, float(runtime))
            penalized[(inst, enc)] = float(pen)
            row_cutoff = float(cut)
            if cutoff is None:
                cutoff = row_cutoff
            elif cutoff != row_cutoff:
                raise SchemaError("inconsistent cutoff_s values in matrix file")
    encoding_ids = tuple(sorted({enc for _, enc in cells}))
    return PerformanceMatrix(
        cutoff_s=cutoff if cutoff is not None else 0.0,
        encoding_ids=encoding_ids,
        cells=cells,
        penalized=penalized,
    )
