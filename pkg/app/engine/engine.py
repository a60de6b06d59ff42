"""
IncidenceEngine: drives the verifiers and applications over (q, seed) grids, runs the
oracle suite and stores runs.
"""
# Standard library imports
import csv
import hashlib
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

# Third-party imports
from sqlalchemy.exc import SQLAlchemyError

# Local application imports
from app.engine.errors import ExperimentConfigError, IncidenceError
from app.engine.gf_module import FieldSpec, field_for_order, parse_field_order
from app.engine.geometry_module import (
    IncidenceSet, PointSet, cartesian, dump_set, dumps_set, generate, make_rng, parse_generator, population,
)
from app.engine.geometry_module.generators import (
    STREAM_A, STREAM_B, STREAM_DEFAULT, STREAM_MULTIPLICITY, full_hyperplanepairs, full_linepairs, full_points,
    multiset_random, random_linepairs, random_points, random_vectors,
)
from app.engine.counting_module import count_incidences
from app.engine.spectral_module import (
    DENSE_VERTEX_CAP, build_graph, mixing_check, mixing_check_l2, second_eigenvalue, verify_neighbor_formula,
    verify_square_decomposition,
)
from app.engine.theorems_module import (
    DEFAULT_THRESHOLD_EXPONENT, BoundReport, SdzParams, build_energy_reduction, graph_spectrum, verify_cartesian,
    verify_cs, verify_hyperplane, verify_sdz, verify_vinh,
)
from app.engine.apps_module import (
    DEFAULT_VARIANT, PREDICATE_VARIANTS, dot_product_4d, dot_product_pair_count, dot_product_single, sum_product,
    vector_valued,
)
from app.utils.response_template import method_response_template
from app.utils.transform_string import transform_string
from config import Config, ExperimentRun, ResultRecord, Session, init_db

COMMANDS = ("verify", "spectrum", "apps", "oracle")
THEOREMS = ("cs1", "cs2", "vinh", "hyperplane", "cartesian", "sdz")
APPS = ("dot_pairs", "dot_single", "dot_4d", "sum_product", "vector_valued")
OUTPUTS = ("csv", "json")
LAMBDA_CHOICES = ("paper", "computed")
DEFAULT_ORACLE_FIELDS = (2, 3, 4, 5)
# Seeded instances per oracle check when oracle_instances is unset.
ORACLE_COUNTS = {"counting": 200, "mixing": 500, "mixing_l2": 200, "vinh": 100, "energy": 100}
# (d1, d2, q) product graphs checked beyond the plane case.
ORACLE_MIXED_GRAPHS = ((2, 3, 2), (3, 3, 2), (2, 3, 3))
SPOT_CHECK_EVERY = 100

RESULT_COLUMNS = (
    "run_id", "q", "d1", "d2", "theorem_id", "seed", "lhs", "main_term", "bound_term",
    "discrepancy", "ratio", "hypothesis_ok", "elapsed_ms",
)

# Fields that do not change results and stay out of the run hash.
_NON_SEMANTIC = ("output", "workers", "timings", "store", "dump_sets")

_ALIASES = {
    "theorem": "theorem_id",
    "app": "app_id",
    "q": "q_list",
    "lambda": "lambda_mode",
    "out": "output",
    "gen_points": "gen",
}


# ----- configuration ----------------------------------------------------------------


def parse_q_list(value) -> Tuple[int, ...]:
    """Accept "2,3,5", a single int or a list; order is kept and duplicates dropped."""
    if isinstance(value, str):
        items = [item.strip() for item in value.split(",") if item.strip()]
    elif isinstance(value, int):
        items = [value]
    else:
        items = list(value or [])
    if not items:
        raise ExperimentConfigError("empty q list")
    out = []
    for item in items:
        try:
            q = int(item)
        except (TypeError, ValueError) as e:
            raise ExperimentConfigError(f"q value {item!r} is not an integer") from e
        if q not in out:
            out.append(q)
    return tuple(out)


def parse_seed_range(value) -> Tuple[int, int]:
    """Accept "a..b" (inclusive), "a", an int or a [start, stop] pair."""
    try:
        if isinstance(value, str):
            start, sep, stop = value.strip().partition("..")
            bounds = (int(start), int(stop)) if sep else (int(start), int(start))
        elif isinstance(value, int):
            bounds = (value, value)
        else:
            start, stop = value
            bounds = (int(start), int(stop))
    except (TypeError, ValueError) as e:
        raise ExperimentConfigError(f"seed range {value!r} is not of the form a..b") from e
    if not 0 <= bounds[0] <= bounds[1] < 2 ** 64:
        raise ExperimentConfigError(f"seed range {value!r} is empty or outside 0..2^64-1")
    return bounds


def parse_fault(value) -> Optional[Tuple[int, int]]:
    if value is None or value == "":
        return None
    try:
        if isinstance(value, str):
            u, v = (int(x) for x in value.split(","))
        else:
            u, v = (int(x) for x in value)
    except (TypeError, ValueError) as e:
        raise ExperimentConfigError(f"fault {value!r} must be two vertex indices u,v") from e
    if u < 0 or v < 0:
        raise ExperimentConfigError(f"fault {value!r} has a negative vertex index")
    return u, v


@dataclass(frozen=True)
class ExperimentConfig:
    """
    One experiment request.

    Fields:
    - command (str): verify, spectrum, apps or oracle.
    - theorem_id / app_id (str): What to run for verify / apps.
    - q_list (tuple): Field orders, each a prime power.
    - d1, d2 (int): Factor dimensions.
    - gen / gen_lines (str): Generator specs `kind:key=value,...` for the point side and the flat side.
    - seeds (tuple): Inclusive seed range (start, stop).
    - lambda_mode (str): paper or computed.
    - variant (str): as_written or corrected, for dot_pairs.
    - threshold_exponent (float): Hypothesis exponent of the A x B bound.
    - a, b, t (int): Dot-product targets.
    - sdz_c, sdz_c_prime (float): Constants of the large-incidence statement.
    - output (str): csv or json.
    - workers (int, optional): Trial-level parallelism; defaults to the engine's.
    - eigen_tol (float): Eigensolver tolerance.
    - timings (bool): Fill elapsed_ms; off by default so reruns are byte-identical.
    - inject_fault (tuple, optional): Adjacency entry to toggle in oracle runs.
    - dump_sets (str, optional): Directory for the serialized input sets.
    - store (bool): Persist the run.
    - oracle_instances (int, optional): Seeded instances for every oracle check; unset uses ORACLE_COUNTS.
    """
    command: str = "verify"
    theorem_id: Optional[str] = None
    app_id: Optional[str] = None
    q_list: Tuple[int, ...] = (2,)
    d1: int = 2
    d2: int = 2
    gen: Optional[str] = None
    gen_lines: Optional[str] = None
    seeds: Tuple[int, int] = field(default_factory=lambda: (Config.SEED_BASE, Config.SEED_BASE))
    lambda_mode: str = "paper"
    variant: str = DEFAULT_VARIANT
    threshold_exponent: float = DEFAULT_THRESHOLD_EXPONENT
    a: int = 1
    b: int = 1
    t: int = 0
    sdz_c: float = 1.0
    sdz_c_prime: float = 1.0
    output: str = "csv"
    workers: Optional[int] = None
    eigen_tol: float = Config.EIGEN_TOL
    timings: bool = False
    inject_fault: Optional[Tuple[int, int]] = None
    dump_sets: Optional[str] = None
    store: bool = Config.STORE_RESULTS
    oracle_instances: Optional[int] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base: Optional["ExperimentConfig"] = None) -> "ExperimentConfig":
        """
        Build a config from a JSON-style mapping; keys given in `data` override `base`.

        Raises:
            ExperimentConfigError: On unknown keys or unparsable values.
        """
        if not isinstance(data, dict):
            raise ExperimentConfigError("experiment config must be a JSON object")
        known = {f.name for f in fields(cls)}
        values = asdict(base) if base is not None else {}
        for raw_key, value in data.items():
            key = _ALIASES.get(raw_key.replace("-", "_"), raw_key.replace("-", "_"))
            if key not in known:
                raise ExperimentConfigError(f"unknown config key {raw_key!r}")
            if value is None:
                continue
            values[key] = value
        if "q_list" in values:
            values["q_list"] = parse_q_list(values["q_list"])
        if "seeds" in values:
            values["seeds"] = parse_seed_range(values["seeds"])
        if "inject_fault" in values:
            values["inject_fault"] = parse_fault(values["inject_fault"])
        try:
            for key in ("d1", "d2", "a", "b", "t", "oracle_instances"):
                if values.get(key) is not None:
                    values[key] = int(values[key])
            for key in ("threshold_exponent", "sdz_c", "sdz_c_prime", "eigen_tol"):
                if key in values:
                    values[key] = float(values[key])
            if values.get("workers") is not None:
                values["workers"] = int(values["workers"])
        except (TypeError, ValueError) as e:
            raise ExperimentConfigError(f"bad numeric config value: {e}") from e
        return cls(**values)

    @property
    def target(self) -> Optional[str]:
        if self.command == "verify":
            return self.theorem_id
        if self.command == "apps":
            return self.app_id
        return None

    def validate(self) -> "ExperimentConfig":
        """
        Raises:
            ExperimentConfigError: On inconsistent or unsupported settings.
            FieldError: If some q is not a prime power.
        """
        if self.command not in COMMANDS:
            raise ExperimentConfigError(f"unknown command {self.command!r}")
        if not self.q_list:
            raise ExperimentConfigError("empty q list")
        for q in self.q_list:
            parse_field_order(q)
        if self.command == "verify" and self.theorem_id not in THEOREMS:
            raise ExperimentConfigError(f"unknown theorem {self.theorem_id!r}; expected one of {', '.join(THEOREMS)}")
        if self.command == "apps" and self.app_id not in APPS:
            raise ExperimentConfigError(f"unknown application {self.app_id!r}; expected one of {', '.join(APPS)}")
        if self.lambda_mode not in LAMBDA_CHOICES:
            raise ExperimentConfigError(f"lambda mode must be paper or computed, got {self.lambda_mode!r}")
        if self.variant not in PREDICATE_VARIANTS:
            raise ExperimentConfigError(f"variant must be as_written or corrected, got {self.variant!r}")
        if self.output not in OUTPUTS:
            raise ExperimentConfigError(f"output must be csv or json, got {self.output!r}")
        if self.workers is not None and self.workers < 1:
            raise ExperimentConfigError("workers must be at least 1")
        if not self.eigen_tol > 0:
            raise ExperimentConfigError("eigen tolerance must be positive")
        if not 1 <= self.d1 <= 4 or not 1 <= self.d2 <= 4:
            raise ExperimentConfigError(f"dimensions ({self.d1}, {self.d2}) outside 1..4")
        if self.oracle_instances is not None and self.oracle_instances < 1:
            raise ExperimentConfigError("oracle_instances must be at least 1")
        for text in (self.gen, self.gen_lines):
            if text:
                try:
                    parse_generator(text)
                except IncidenceError as e:
                    raise ExperimentConfigError(str(e)) from e
        return self

    def canonical(self) -> str:
        data = {k: v for k, v in asdict(self).items() if k not in _NON_SEMANTIC}
        return json.dumps(data, sort_keys=True, default=list)

    @property
    def run_id(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:12]

    def grid(self) -> List[Tuple[int, int]]:
        start, stop = self.seeds
        return sorted((q, seed) for q in self.q_list for seed in range(start, stop + 1))


# ----- results ----------------------------------------------------------------------


@dataclass(frozen=True)
class ResultRow:
    run_id: str
    q: int
    d1: int
    d2: int
    theorem_id: str
    seed: int
    lhs: int
    main_term: float
    bound_term: float
    discrepancy: float
    ratio: float
    hypothesis_ok: bool
    elapsed_ms: Optional[float] = None

    @classmethod
    def from_report(cls, run_id: str, q: int, d1: int, d2: int, seed: int, report: BoundReport,
                    elapsed_ms: Optional[float] = None) -> "ResultRow":
        return cls(run_id=run_id, q=q, d1=d1, d2=d2, theorem_id=report.theorem_id, seed=seed, lhs=int(report.lhs),
                   main_term=float(report.main_term), bound_term=float(report.bound_term),
                   discrepancy=float(report.discrepancy), ratio=float(report.ratio),
                   hypothesis_ok=bool(report.hypothesis_ok), elapsed_ms=elapsed_ms)

    def as_dict(self) -> Dict[str, Any]:
        return {column: getattr(self, column) for column in RESULT_COLUMNS}


def _csv_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def render_rows(rows: List[ResultRow], output: str = "csv") -> str:
    """CSV with a header row, or a JSON array with the same keys."""
    if output == "json":
        return json.dumps([row.as_dict() for row in rows], indent=2) + "\n"
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(RESULT_COLUMNS)
    for row in rows:
        writer.writerow([_csv_value(v) for v in row.as_dict().values()])
    return buffer.getvalue()


@dataclass
class Trial:
    q: int
    seed: int
    report: BoundReport
    inputs: Dict[str, IncidenceSet]
    elapsed_ms: float
    incidence_pair: Optional[Tuple[PointSet, IncidenceSet]] = None


@dataclass
class RunResult:
    run_id: str
    config: ExperimentConfig
    rows: List[ResultRow]
    failures: List[Dict[str, Any]]
    exit_code: int

    def render(self, output: Optional[str] = None) -> str:
        return render_rows(self.rows, output or self.config.output)


@dataclass(frozen=True)
class OracleCheck:
    name: str
    q: int
    ok: bool
    detail: Dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class OracleReport:
    checks: List[OracleCheck]

    @property
    def ok(self) -> bool:
        return all(check.ok for check in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1

    @property
    def counterexample(self) -> Optional[Dict[str, Any]]:
        failing = next((check for check in self.checks if not check.ok), None)
        return None if failing is None else failing.as_dict()

    def summary(self) -> str:
        lines = [f"{'PASS' if c.ok else 'FAIL'} {c.name} q={c.q}" for c in self.checks]
        lines.append(f"{sum(c.ok for c in self.checks)}/{len(self.checks)} checks passed")
        return "\n".join(lines) + "\n"


def _oracle_count(check: str, instances: Optional[int]) -> int:
    return ORACLE_COUNTS[check] if instances is None else instances


# ----- generators -------------------------------------------------------------------


def default_generators(target: str, d1: int = 2, d2: int = 2) -> Tuple[str, Optional[str]]:
    """Point-side and flat-side generator specs used when a config leaves them out."""
    flats = "random_linepairs:n=20" if (d1, d2) == (2, 2) else "random_hyperplanepairs:n=20"
    table = {
        "cs1": ("random_points:n=20", flats),
        "cs2": ("random_points:n=20", flats),
        "vinh": ("random_points:n=20", "random_linepairs:n=20"),
        "sdz": ("random_points:n=20", flats),
        "hyperplane": ("random_points:n=20", "random_hyperplanepairs:n=20"),
        "cartesian": ("random_vectors:n=4", "random_linepairs:n=10,nonvertical_only"),
        "dot_pairs": ("random_points:n=20", None),
        "dot_single": ("random_vectors:n=20", None),
        "dot_4d": ("random_vectors:n=20,d=4", None),
        "sum_product": ("random_vectors:n=6", None),
        "vector_valued": ("random_vectors:n=4", None),
    }
    return table[target]


def build_set(spec: FieldSpec, text: str, seed: int, stream: int = STREAM_DEFAULT, **defaults: Any):
    """
    Generate from a `kind:key=value` spec; missing keys fall back to `defaults` and sample
    sizes are clamped to the population of the kind.
    """
    kind, params = parse_generator(text)
    for key, value in defaults.items():
        params.setdefault(key, value)
    if "n" in params and kind.startswith(("random_", "multiset_")):
        params["n"] = min(int(params["n"]), population(spec.q, kind, **params))
    if kind.startswith("random_"):
        params.setdefault("stream", stream)
    return generate(spec, kind, seed=seed, **params)


# ----- engine -----------------------------------------------------------------------


class IncidenceEngine:
    def __init__(self, verbose: bool = Config.VERBOSE, workers: Optional[int] = None):
        self.verbose = verbose
        self.workers = workers or Config.WORKERS
        self._log(f"IncidenceEngine ready with {self.workers} workers")

    def _log(self, message: str):
        """
        Log a message to stderr if verbose mode is enabled.

        Args:
            message (str): The message to be logged.
        """
        if self.verbose:
            timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
            print(f"[{timestamp}]-{message}", file=sys.stderr)

    @contextmanager
    def get_db_session(self):
        init_db()
        session = Session()
        self._log("Database session opened")
        try:
            yield session
            session.commit()
            self._log("Database changes committed")
        except SQLAlchemyError as e:
            session.rollback()
            self._log(f"Database error, rolling back: {str(e)}")
            raise
        except Exception as e:
            session.rollback()
            self._log(f"Unexpected error, rolling back: {str(e)}")
            raise
        finally:
            session.close()
            self._log("Database session closed")

    # ----- trials -------------------------------------------------------------------

    def _trial(self, config: ExperimentConfig, q: int, seed: int, spectra: Dict[int, Any]) -> Trial:
        spec = field_for_order(q)
        target = config.target
        point_gen, flat_gen = default_generators(target, config.d1, config.d2)
        point_gen = config.gen or point_gen
        flat_gen = config.gen_lines or flat_gen
        dims = {"d1": config.d1, "d2": config.d2}
        started = time.perf_counter()
        pair = None

        if target in ("cs1", "cs2", "vinh", "hyperplane", "sdz"):
            P = build_set(spec, point_gen, seed, STREAM_DEFAULT, **dims)
            L = build_set(spec, flat_gen, seed, STREAM_B, **dims)
            inputs, pair = {"points": P, "flats": L}, (P, L)
            if target in ("cs1", "cs2"):
                part1, part2 = verify_cs(P, L)
                report = part1 if target == "cs1" else part2
            elif target == "vinh":
                report = verify_vinh(P, L, config.lambda_mode, tol=config.eigen_tol, spectrum=spectra.get(q))
            elif target == "hyperplane":
                report = verify_hyperplane(P, L, config.lambda_mode, tol=config.eigen_tol, spectrum=spectra.get(q))
            else:
                report = verify_sdz(P, L, SdzParams(config.sdz_c, config.sdz_c_prime))
        elif target == "cartesian":
            A = build_set(spec, point_gen, seed, STREAM_A, d=2)
            B = build_set(spec, point_gen, seed, STREAM_B, d=2)
            if A.total > B.total:
                A, B = B, A
            L = build_set(spec, flat_gen, seed, STREAM_DEFAULT, nonvertical_only=True)
            inputs = {"a": A, "b": B, "flats": L}
            pair = (cartesian(spec, A, B), L)
            report = verify_cartesian(A, B, L, config.threshold_exponent)
        elif target == "dot_pairs":
            E = build_set(spec, point_gen, seed, STREAM_DEFAULT, d1=2, d2=2)
            inputs = {"points": E}
            report = dot_product_pair_count(E, config.a % q, config.b % q, config.variant).to_bound_report(q)
        elif target == "dot_single":
            E = build_set(spec, point_gen, seed, STREAM_DEFAULT, d=2)
            inputs = {"points": E}
            report = dot_product_single(E, config.a % q).to_bound_report(q, "dot_single")
        elif target == "dot_4d":
            E = build_set(spec, point_gen, seed, STREAM_DEFAULT, d=4)
            inputs = {"points": E}
            report = dot_product_4d(E, config.t % q).to_bound_report(q, "dot_4d")
        elif target == "sum_product":
            A = build_set(spec, point_gen, seed, STREAM_DEFAULT, d=2)
            inputs = {"a": A}
            report = sum_product(A).to_bound_report(q)
        elif target == "vector_valued":
            A = build_set(spec, point_gen, seed, STREAM_A, d=2)
            B = build_set(spec, point_gen, seed, STREAM_B, d=2)
            inputs = {"a": A, "b": B}
            report = vector_valued(A, B).to_bound_report(q)
        else:
            raise ExperimentConfigError(f"nothing to run for {target!r}")

        elapsed = (time.perf_counter() - started) * 1000.0
        return Trial(q=q, seed=seed, report=report, inputs=inputs, elapsed_ms=elapsed, incidence_pair=pair)

    def _spot_check(self, trials: List[Trial]) -> List[Dict[str, Any]]:
        """Recount every hundredth incidence row with the naive counter."""
        failures = []
        for trial in trials[::SPOT_CHECK_EVERY]:
            if trial.incidence_pair is None:
                continue
            P, L = trial.incidence_pair
            naive = count_incidences(P, L, "naive").count
            if naive != trial.report.lhs:
                failures.append({"check": "spot_check", "q": trial.q, "seed": trial.seed,
                                 "lhs": trial.report.lhs, "naive": naive,
                                 "points": dumps_set(P), "flats": dumps_set(L)})
        return failures

    def _dump_sets(self, config: ExperimentConfig, trials: List[Trial]) -> None:
        os.makedirs(config.dump_sets, exist_ok=True)
        for trial in trials:
            for role, collection in trial.inputs.items():
                name = transform_string(f"{config.target} q{trial.q} seed{trial.seed} {role}")
                dump_set(collection, os.path.join(config.dump_sets, f"{name}.txt"))

    def run(self, config: ExperimentConfig) -> RunResult:
        """
        Execute a verify or apps config over its (q, seed) grid.

        Returns:
            RunResult: Rows sorted by (q, seed); exit_code 1 iff some hard check failed.

        Raises:
            ExperimentConfigError, FieldError: On invalid configs.
        """
        config.validate()
        if config.command not in ("verify", "apps"):
            raise ExperimentConfigError(f"run handles verify and apps, not {config.command!r}")
        run_id = config.run_id
        grid = config.grid()
        self._log(f"run {run_id}: {config.target} over {len(grid)} trials")

        spectra = {}
        if config.target in ("vinh", "hyperplane") and config.lambda_mode == "computed":
            for q in config.q_list:
                spectra[q] = graph_spectrum(field_for_order(q), config.d1, config.d2, config.eigen_tol)

        slots: List[Optional[Trial]] = [None] * len(grid)

        def work(index: int) -> None:
            q, seed = grid[index]
            slots[index] = self._trial(config, q, seed, spectra)

        workers = min(config.workers or self.workers, max(1, len(grid)))
        if workers <= 1:
            for index in range(len(grid)):
                work(index)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(work, range(len(grid))))

        rows, failures = [], []
        for trial in slots:
            report = trial.report
            rows.append(ResultRow.from_report(run_id, trial.q, config.d1, config.d2, trial.seed, report,
                                              round(trial.elapsed_ms, 3) if config.timings else None))
            if report.hard and not report.passed:
                failures.append({"check": report.theorem_id, "q": trial.q, "seed": trial.seed,
                                 "report": report.as_dict()})
        failures.extend(self._spot_check(slots))

        if config.dump_sets:
            self._dump_sets(config, slots)
        result = RunResult(run_id=run_id, config=config, rows=rows, failures=failures,
                           exit_code=1 if failures else 0)
        self._log(f"run {run_id} finished: {len(rows)} rows, {len(failures)} failures")
        if config.store:
            self.store_run(result)
        return result

    # ----- spectrum -----------------------------------------------------------------

    def spectrum(self, q: int, d1: int = 2, d2: int = 2, tol: Optional[float] = None) -> Dict[str, Any]:
        """Size, degree and second eigenvalue of the product polarity graph."""
        spec = field_for_order(q)
        graph, report = graph_spectrum(spec, d1, d2, tol or Config.EIGEN_TOL)
        return {"q": q, "d1": d1, "d2": d2, "n": graph.n, "k": graph.k, "loops": graph.loops(),
                "regular": graph.is_regular(), **report.as_dict()}

    # ----- oracle -------------------------------------------------------------------

    def _oracle_counting(self, spec: FieldSpec, instances: Optional[int]) -> OracleCheck:
        q = spec.q
        count = _oracle_count("counting", instances)
        n_points = min(12, q ** 4)
        n_lines = min(12, (q * q + q) ** 2)
        for seed in range(count):
            if seed % 2:
                P = multiset_random(spec, n_points, 3, seed, "points")
                L = multiset_random(spec, n_lines, 3, seed, "linepairs")
            else:
                P = random_points(spec, n_points, seed)
                L = random_linepairs(spec, n_lines, seed, stream=STREAM_B)
            naive = count_incidences(P, L, "naive").count
            indexed = count_incidences(P, L, "indexed").count
            if naive != indexed:
                return OracleCheck("counting_equivalence", q, False, {
                    "seed": seed, "naive": naive, "indexed": indexed,
                    "points": dumps_set(P), "flats": dumps_set(L),
                })
        return OracleCheck("counting_equivalence", q, True, {"instances": count})

    def _oracle_full_space(self, spec: FieldSpec) -> List[OracleCheck]:
        q = spec.q
        checks = []
        P, L = full_points(spec), full_linepairs(spec)
        I = count_incidences(P, L, "indexed").count
        checks.append(OracleCheck("full_space_linepairs", q, I == L.total * q * q,
                                  {"incidences": I, "expected": L.total * q * q}))
        if q <= 3:
            P3, H3 = full_points(spec, 3, 3), full_hyperplanepairs(spec, 3, 3)
            I3 = count_incidences(P3, H3, "indexed").count
            checks.append(OracleCheck("full_space_hyperplanepairs", q, I3 == H3.total * q ** 4,
                                      {"incidences": I3, "expected": H3.total * q ** 4}))
        return checks

    def _oracle_graph(self, spec: FieldSpec, fault: Optional[Tuple[int, int]], instances: Optional[int],
                      tol: float) -> List[OracleCheck]:
        q = spec.q
        graph = build_graph(spec, 2, 2)
        if fault is not None:
            u, v = fault
            if u >= graph.n or v >= graph.n:
                raise ExperimentConfigError(f"fault ({u}, {v}) outside a graph on {graph.n} vertices")
            graph = graph.flip_entry(u, v)
            self._log(f"injected fault at ({u}, {v}) for q={q}")
        checks = [OracleCheck("regular", q, graph.is_regular() and graph.k == (q + 1) ** 2,
                              {"k": graph.k, "n": graph.n})]

        neighbors = verify_neighbor_formula(graph)
        checks.append(OracleCheck("neighbor_formula", q, neighbors.ok, {
            "pairs_checked": neighbors.pairs_checked,
            "first_mismatch": asdict(neighbors.first_mismatch) if neighbors.first_mismatch else None,
        }))
        if graph.n <= DENSE_VERTEX_CAP:
            square = verify_square_decomposition(graph)
            checks.append(OracleCheck("square_decomposition", q, square.ok, {
                "e_degree": square.e_degree, "reason": square.reason,
                "first_offending": asdict(square.first_offending) if square.first_offending else None,
            }))

        spectral = second_eigenvalue(graph, tol)
        checks.append(OracleCheck("lambda_bound", q, spectral.bound_ok, spectral.as_dict()))

        checks.append(self._oracle_mixing(graph, spectral.lambda2, _oracle_count("mixing", instances)))
        checks.append(self._oracle_mixing_l2(graph, spectral.lambda2, _oracle_count("mixing_l2", instances)))
        checks.append(self._oracle_vinh(graph, spectral, _oracle_count("vinh", instances)))
        return checks

    def _oracle_mixing(self, graph, lam: float, count: int) -> OracleCheck:
        for seed in range(count):
            rng = make_rng(seed)
            U = rng.choice(graph.n, size=int(rng.integers(1, graph.n + 1)), replace=False)
            V = rng.choice(graph.n, size=int(rng.integers(1, graph.n + 1)), replace=False)
            mixing = mixing_check(graph, U, V, lam)
            if not mixing.ok:
                return OracleCheck("mixing", graph.q, False, {"seed": seed, **mixing.as_dict()})
        return OracleCheck("mixing", graph.q, True, {"instances": count})

    def _oracle_mixing_l2(self, graph, lam: float, count: int) -> OracleCheck:
        for seed in range(count):
            rng = make_rng(seed, STREAM_MULTIPLICITY)
            f = rng.integers(0, 4, size=graph.n)
            h = rng.integers(0, 4, size=graph.n)
            mixing = mixing_check_l2(graph, f, h, lam)
            if not mixing.ok:
                return OracleCheck("mixing_l2", graph.q, False, {"seed": seed, **mixing.as_dict()})
        return OracleCheck("mixing_l2", graph.q, True, {"instances": count})

    def _oracle_vinh(self, graph, spectral, count: int) -> OracleCheck:
        """The computed-lambda incidence bound is unconditional, so every trial must pass."""
        spec = graph.spec
        n_points = min(20, spec.q ** 4)
        for seed in range(count):
            P = random_points(spec, n_points, seed, stream=STREAM_A)
            L = random_linepairs(spec, 20, seed, stream=STREAM_B)
            report = verify_vinh(P, L, "computed", spectrum=(graph, spectral))
            if not report.passed:
                return OracleCheck("vinh_computed", spec.q, False, {
                    "seed": seed, "lhs": report.lhs, "discrepancy": report.discrepancy,
                    "bound_term": report.bound_term, "points": dumps_set(P), "flats": dumps_set(L),
                })
        return OracleCheck("vinh_computed", spec.q, True, {"instances": count})

    def _oracle_mixed_graphs(self, spec: FieldSpec, tol: float) -> List[OracleCheck]:
        checks = []
        for d1, d2, q in ORACLE_MIXED_GRAPHS:
            if q != spec.q:
                continue
            graph = build_graph(spec, d1, d2)
            label = f"{d1}x{d2}"
            neighbors = verify_neighbor_formula(graph)
            checks.append(OracleCheck(f"neighbor_formula_{label}", q, graph.is_regular() and neighbors.ok, {
                "n": graph.n, "k": graph.k,
                "first_mismatch": asdict(neighbors.first_mismatch) if neighbors.first_mismatch else None,
            }))
            spectral = second_eigenvalue(graph, tol)
            checks.append(OracleCheck(f"lambda_bound_{label}", q, spectral.bound_ok, spectral.as_dict()))
        return checks

    def _oracle_energy(self, spec: FieldSpec, instances: Optional[int]) -> OracleCheck:
        q = spec.q
        count = _oracle_count("energy", instances)
        for seed in range(count):
            A = random_vectors(spec, min(3, q * q), seed, stream=STREAM_A)
            L = random_linepairs(spec, 4, seed, True, STREAM_B)
            reduction = build_energy_reduction(A, L)
            if not reduction.agree:
                return OracleCheck("energy_reduction", q, False, {
                    "seed": seed, "energy": reduction.energy, "direct": reduction.direct_energy,
                    "a": dumps_set(A), "flats": dumps_set(L),
                })
        return OracleCheck("energy_reduction", q, True, {"instances": count})

    def oracle(self, config: ExperimentConfig) -> OracleReport:
        """
        Cross-check the counters, the graph structure, the spectral bound, both mixing lemmas,
        the computed-lambda incidence bound, the full-space identities and the energy reduction
        for every q in the config. Mixed-dimension graphs are checked for the q in ORACLE_MIXED_GRAPHS.
        """
        config.validate()
        checks: List[OracleCheck] = []
        for q in config.q_list:
            spec = field_for_order(q)
            self._log(f"oracle suite for q={q}")
            checks.append(self._oracle_counting(spec, config.oracle_instances))
            checks.extend(self._oracle_full_space(spec))
            checks.extend(self._oracle_graph(spec, config.inject_fault, config.oracle_instances, config.eigen_tol))
            checks.extend(self._oracle_mixed_graphs(spec, config.eigen_tol))
            checks.append(self._oracle_energy(spec, config.oracle_instances))
        report = OracleReport(checks)
        self._log(f"oracle finished: {'pass' if report.ok else 'FAIL'}")
        return report

    # ----- persistence --------------------------------------------------------------

    def store_run(self, result: RunResult) -> Dict[str, Any]:
        try:
            with self.get_db_session() as session:
                run = ExperimentRun(
                    run_id=result.run_id,
                    command=result.config.command,
                    target=result.config.target,
                    config=result.config.canonical(),
                    exit_code=result.exit_code,
                    row_count=len(result.rows),
                )
                run.results = [ResultRecord(**row.as_dict()) for row in result.rows]
                session.add(run)
                session.flush()
                data = run.as_dict()
            return method_response_template(message="Run stored", data=data, success=True)
        except SQLAlchemyError as e:
            return method_response_template(message=f"Database error while storing run: {str(e)}", data=None)

    def list_runs(self, limit: int = 50) -> Dict[str, Any]:
        try:
            with self.get_db_session() as session:
                runs = (session.query(ExperimentRun)
                        .order_by(ExperimentRun.created_at.desc(), ExperimentRun.id.desc())
                        .limit(limit).all())
                data = [run.as_dict() for run in runs]
            return method_response_template(message="Runs retrieved", data=data, success=True)
        except SQLAlchemyError as e:
            return method_response_template(message=f"Database error while listing runs: {str(e)}", data=None)

    def get_run(self, run_id: str) -> Dict[str, Any]:
        try:
            with self.get_db_session() as session:
                run = (session.query(ExperimentRun).filter_by(run_id=run_id)
                       .order_by(ExperimentRun.id.desc()).first())
                if run is None:
                    return method_response_template(message=f"Run {run_id} not found", data=None)
                data = run.as_dict()
                data["rows"] = [record.as_dict() for record in run.results]
            return method_response_template(message="Run retrieved", data=data, success=True)
        except SQLAlchemyError as e:
            return method_response_template(message=f"Database error while reading run: {str(e)}", data=None)


incidence_engine = IncidenceEngine(verbose=Config.VERBOSE)
