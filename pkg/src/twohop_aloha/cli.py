"""Command-line front end: scenario files, sweeps, regions, validation.

Scenario files are flat key-value INI text with typed sections and a
``schema_version`` key (grammar documented in the README).  All commands
write CSV only; output is byte-stable for fixed inputs (floats rendered
with 9 significant digits, rows in sweep order, LF line endings) and files
are written atomically so failed runs never leave partial output behind.

Exit codes: 0 success, 2 configuration error, 3 numerical-capacity error,
4 validation failure.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import math
import os
import sys
import tempfile
from dataclasses import dataclass

from . import analytic_erasure, sim_erasure, sim_fading, superposition
from .core import (
    INFINITE_K,
    NON_ORTHOGONAL,
    ErasureParams,
    FadingParams,
    Receiver,
    ScenarioConfig,
    ServiceMetrics,
    Tdma,
    is_infinite,
)
from .superposition import CapacityError, ConditionedMC, ExactEnum

#: Fixed default seed (0xC0FFEE); echoed into every stochastic output.
DEFAULT_SEED = 0xC0FFEE

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPACITY = 3
EXIT_VALIDATION = 4


class ConfigError(ValueError):
    """Scenario/spec file violates the documented grammar or domains."""


# ============================================================================
#  Scenario file parsing
# ============================================================================


def _parse_tolerance(text: str):
    token = text.strip().lower()
    if token in ("inf", "infinite", "infinity"):
        return INFINITE_K
    try:
        value = int(token)
    except ValueError as exc:
        raise ConfigError(f"K must be a non-negative integer or 'inf', got {text!r}") from exc
    if value < 0:
        raise ConfigError(f"K must be >= 0, got {value}")
    return value


def _get(section, key, conv, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"missing required key '{key}' in section [{section.name}]")
        return default
    raw = section[key]
    try:
        return conv(raw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for '{key}' in [{section.name}]: {raw!r}") from exc


def _float_list(text: str) -> list[float]:
    items = text.replace(",", " ").split()
    if not items:
        raise ConfigError("empty value list")
    return [float(x) for x in items]


def load_config_file(path: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    if "meta" not in parser or "schema_version" not in parser["meta"]:
        raise ConfigError("config must carry [meta] schema_version")
    version = _get(parser["meta"], "schema_version", int, required=True)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version} (expected {SCHEMA_VERSION})")
    return parser


def scenario_from_config(parser: configparser.ConfigParser) -> ScenarioConfig:
    if "scenario" not in parser:
        raise ConfigError("config must contain a [scenario] section")
    sc = parser["scenario"]
    has_erasure = "erasure" in parser
    has_fading = "fading" in parser
    if has_erasure == has_fading:
        raise ConfigError("config must contain exactly one of [erasure] or [fading]")
    if has_erasure:
        es = parser["erasure"]
        channel = ErasureParams(
            eps1=_get(es, "eps1", float, required=True),
            eps2=_get(es, "eps2", float, required=True),
        )
    else:
        fs = parser["fading"]
        channel = FadingParams(
            alpha2=_get(fs, "alpha2", float, required=True),
            beta2=_get(fs, "beta2", float, required=True),
            P_c=_get(fs, "p_c", float, default=10.0),
            P_cbar=_get(fs, "p_cbar", float, default=4.0),
            P_c_ap=_get(fs, "p_c_ap", float, default=10.0),
            P_cbar_ap=_get(fs, "p_cbar_ap", float, default=4.0),
            r_c=_get(fs, "r_c", float, default=1.0),
            r_cbar=_get(fs, "r_cbar", float, default=1.0),
        )

    allocation_name = _get(sc, "allocation", str, default="non_orthogonal").strip().lower()
    if allocation_name in ("non_orthogonal", "nonorthogonal", "noma"):
        allocation = NON_ORTHOGONAL
    elif allocation_name == "tdma":
        alpha = _get(sc, "alpha", float, required=True)
        allocation = Tdma(alpha=alpha)
    else:
        raise ConfigError(f"unknown allocation {allocation_name!r}")

    receiver = _get(sc, "receiver", str, default=Receiver.COLLISION).strip().lower()
    if receiver not in Receiver.ALL:
        raise ConfigError(f"unknown receiver {receiver!r}")

    try:
        return ScenarioConfig(
            L=_get(sc, "l", int, required=True),
            T=_get(sc, "t", int, required=True),
            G=_get(sc, "g", float, required=True),
            gamma_c=_get(sc, "gamma_c", float, required=True),
            channel=channel,
            K=_get(sc, "k", _parse_tolerance, default=INFINITE_K),
            receiver=receiver,
            allocation=allocation,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ============================================================================
#  Evaluation backends
# ============================================================================


@dataclass(frozen=True)
class AnalyticBackend:
    name = "analytic"


@dataclass(frozen=True)
class SimBackend:
    frames: int
    seed: int = DEFAULT_SEED
    workers: int = 1
    name = "sim"


@dataclass(frozen=True)
class FadingBackend:
    slots: int
    seed: int = DEFAULT_SEED
    workers: int = 1
    name = "fading"


@dataclass(frozen=True)
class SuperpositionBackend:
    estimator: ExactEnum | ConditionedMC = ExactEnum()
    name = "superposition"

    @property
    def stochastic(self) -> bool:
        return isinstance(self.estimator, ConditionedMC)


Backend = AnalyticBackend | SimBackend | FadingBackend | SuperpositionBackend


def _backend_is_stochastic(backend: Backend) -> bool:
    if isinstance(backend, (SimBackend, FadingBackend)):
        return True
    if isinstance(backend, SuperpositionBackend):
        return backend.stochastic
    return False


def _backend_seed(backend: Backend):
    if isinstance(backend, (SimBackend, FadingBackend)):
        return backend.seed
    if isinstance(backend, SuperpositionBackend) and backend.stochastic:
        return backend.estimator.seed
    return None


def check_backend_compat(cfg: ScenarioConfig, backend: Backend) -> None:
    erasure = isinstance(cfg.channel, ErasureParams)
    if isinstance(backend, AnalyticBackend):
        if not erasure or cfg.receiver != Receiver.COLLISION:
            raise ConfigError(
                "analytic backend requires the erasure channel and collision receiver"
            )
    elif isinstance(backend, SimBackend):
        if not erasure:
            raise ConfigError("sim backend requires the erasure channel")
    elif isinstance(backend, SuperpositionBackend):
        if not erasure or cfg.receiver != Receiver.SUPERPOSITION:
            raise ConfigError(
                "superposition backend requires the erasure channel and "
                "superposition receiver"
            )
    elif isinstance(backend, FadingBackend):
        if erasure:
            raise ConfigError("fading backend requires fading channel parameters")


def evaluate_point(cfg: ScenarioConfig, backend: Backend):
    """Evaluate one scenario; ServiceMetrics or SimulatedMetrics per backend."""
    if isinstance(backend, AnalyticBackend):
        return analytic_erasure.evaluate_erasure(cfg)
    if isinstance(backend, SimBackend):
        return sim_erasure.simulate(cfg, backend.frames, backend.seed, backend.workers)
    if isinstance(backend, SuperpositionBackend):
        return superposition.evaluate_superposition(cfg, backend.estimator)
    if isinstance(backend, FadingBackend):
        return sim_fading.estimate_fading_metrics(
            cfg, backend.slots, backend.seed, backend.workers
        )
    raise ConfigError(f"unknown backend {backend!r}")


def backend_from_config(parser, name: str, args) -> Backend:
    """Build a backend from the config sections plus CLI overrides."""
    sim_sec = parser["sim"] if "sim" in parser else {}
    sup_sec = parser["superposition"] if "superposition" in parser else {}
    seed = args.seed if args.seed is not None else int(sim_sec.get("seed", DEFAULT_SEED))
    workers = args.workers if args.workers else int(sim_sec.get("workers", 1))
    if name == "analytic":
        return AnalyticBackend()
    if name == "sim":
        frames = args.frames or int(sim_sec.get("frames", 0))
        if frames < 1:
            raise ConfigError("sim backend needs a positive frame budget "
                              "(--frames or [sim] frames)")
        return SimBackend(frames=frames, seed=seed, workers=workers)
    if name == "fading":
        slots = args.slots or int(sim_sec.get("slots", 0))
        if slots < 1:
            raise ConfigError("fading backend needs a positive slot budget "
                              "(--slots or [sim] slots)")
        return FadingBackend(slots=slots, seed=seed, workers=workers)
    if name == "superposition":
        kind = str(sup_sec.get("estimator", "exact")).strip().lower()
        if kind == "exact":
            limit = int(sup_sec.get("enum_limit", 200_000))
            return SuperpositionBackend(estimator=ExactEnum(limit=limit))
        if kind == "mc":
            samples = int(sup_sec.get("mc_samples", 1000))
            return SuperpositionBackend(
                estimator=ConditionedMC(n_alloc_samples=samples, seed=seed)
            )
        raise ConfigError(f"unknown superposition estimator {kind!r}")
    raise ConfigError(f"unknown backend {name!r}")


# ============================================================================
#  CSV rendering (byte-stable)
# ============================================================================


def fmt_value(x) -> str:
    if is_infinite(x):
        return "inf"
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    return f"{float(x):.9g}"


def write_csv(path: str, header: list[str], rows: list[list]) -> None:
    """Atomic CSV write: full content is staged, then renamed into place."""
    text = "\n".join(
        [",".join(header)] + [",".join(fmt_value(v) for v in row) for row in rows]
    ) + "\n"
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _metric_row(result) -> list:
    if isinstance(result, ServiceMetrics):
        return [result.R_c, result.R_cbar, result.Gamma_c, result.Gamma_cbar]
    return [
        result.R_c.mean,
        result.R_cbar.mean,
        result.Gamma_c.mean,
        result.Gamma_cbar.mean,
        result.R_c.std_error,
        result.R_cbar.std_error,
        result.Gamma_c.std_error,
        result.Gamma_cbar.std_error,
    ]


# ============================================================================
#  Parameter sweeps
# ============================================================================

SWEEPABLE = ("gamma_c", "T", "L", "eps1", "eps2", "alpha", "alpha2", "beta2", "K", "G")


@dataclass(frozen=True)
class SweepSpec:
    base: ScenarioConfig
    parameter: str
    values: tuple
    backend: Backend
    out_path: str


def _apply_parameter(cfg: ScenarioConfig, name: str, value) -> ScenarioConfig:
    try:
        if name == "gamma_c":
            return cfg.replace(gamma_c=float(value))
        if name == "T":
            return cfg.replace(T=int(value))
        if name == "L":
            return cfg.replace(L=int(value))
        if name == "G":
            return cfg.replace(G=float(value))
        if name == "K":
            return cfg.replace(K=value if is_infinite(value) else int(value))
        if name in ("eps1", "eps2"):
            if not isinstance(cfg.channel, ErasureParams):
                raise ConfigError(f"sweeping {name} requires the erasure channel")
            return cfg.replace(
                channel=dataclasses.replace(cfg.channel, **{name: float(value)})
            )
        if name in ("alpha2", "beta2"):
            if not isinstance(cfg.channel, FadingParams):
                raise ConfigError(f"sweeping {name} requires the fading channel")
            return cfg.replace(
                channel=dataclasses.replace(cfg.channel, **{name: float(value)})
            )
        if name == "alpha":
            if not isinstance(cfg.allocation, Tdma):
                raise ConfigError("sweeping alpha requires the tdma allocation")
            return cfg.replace(allocation=Tdma(alpha=float(value)))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid value {value!r} for parameter {name}: {exc}") from exc
    raise ConfigError(f"unknown sweep parameter {name!r}; choose from {SWEEPABLE}")


def sweep_spec_from_config(parser, base: ScenarioConfig, args) -> SweepSpec:
    if "sweep" not in parser:
        raise ConfigError("sweep command needs a [sweep] section")
    sec = parser["sweep"]
    parameter = _get(sec, "parameter", str, required=True).strip()
    if parameter not in SWEEPABLE:
        raise ConfigError(f"unknown sweep parameter {parameter!r}; choose from {SWEEPABLE}")
    raw_values = _get(sec, "values", str, required=True)
    if parameter == "K":
        values = tuple(_parse_tolerance(v) for v in raw_values.split())
    elif parameter in ("T", "L"):
        values = tuple(int(v) for v in raw_values.split())
    else:
        values = tuple(_float_list(raw_values))
    if not values:
        raise ConfigError("sweep value list is empty")
    backend_name = args.backend or _get(sec, "backend", str, default="analytic").strip()
    backend = backend_from_config(parser, backend_name, args)
    if not args.out:
        raise ConfigError("sweep requires --out")
    return SweepSpec(
        base=base, parameter=parameter, values=values, backend=backend, out_path=args.out
    )


def run_sweep(spec: SweepSpec) -> list[list]:
    """Evaluate every swept point; returns rows and writes the CSV."""
    stochastic = _backend_is_stochastic(spec.backend)
    rows = []
    for value in spec.values:
        cfg = _apply_parameter(spec.base, spec.parameter, value)
        check_backend_compat(cfg, spec.backend)
        result = evaluate_point(cfg, spec.backend)
        row = [value] + _metric_row(result)
        if stochastic:
            if isinstance(result, ServiceMetrics):  # exact result on a stochastic path
                row += [0.0, 0.0, 0.0, 0.0]
            row += [_backend_seed(spec.backend)]
        rows.append(row)
    header = [spec.parameter, "R_c", "R_cbar", "Gamma_c", "Gamma_cbar"]
    if stochastic:
        header += ["R_c_se", "R_cbar_se", "Gamma_c_se", "Gamma_cbar_se", "seed"]
    write_csv(spec.out_path, header, rows)
    return rows


# ============================================================================
#  Throughput regions
# ============================================================================


@dataclass(frozen=True)
class RegionSpec:
    base: ScenarioConfig
    gamma_grid: tuple
    alpha_grid: tuple
    backend: Backend
    schemes: tuple = ("non_orthogonal", "tdma")
    out_path: str = ""


def region_spec_from_config(parser, base: ScenarioConfig, args) -> RegionSpec:
    if "region" not in parser:
        raise ConfigError("region command needs a [region] section")
    sec = parser["region"]
    if "gamma_values" in sec:
        gammas = tuple(_float_list(sec["gamma_values"]))
    else:
        count = _get(sec, "gamma_count", int, default=21)
        gammas = tuple(i / (count - 1) for i in range(count))
    if "alpha_values" in sec:
        alphas = tuple(_float_list(sec["alpha_values"]))
    else:
        count = _get(sec, "alpha_count", int, default=21)
        alphas = tuple(i / (count - 1) for i in range(count))
    if not gammas or not alphas:
        raise ConfigError("region grids must be non-empty")
    if any(not 0 <= v <= 1 for v in gammas) or any(not 0 <= v <= 1 for v in alphas):
        raise ConfigError("region grid values must lie in [0, 1]")
    schemes = tuple(
        _get(sec, "schemes", str, default="non_orthogonal tdma").split()
    )
    for s in schemes:
        if s not in ("non_orthogonal", "tdma"):
            raise ConfigError(f"unknown scheme {s!r} in region spec")
    backend_name = args.backend or _get(sec, "backend", str, default="analytic").strip()
    backend = backend_from_config(parser, backend_name, args)
    if not args.out:
        raise ConfigError("region requires --out")
    return RegionSpec(
        base=base, gamma_grid=gammas, alpha_grid=alphas, backend=backend,
        schemes=schemes, out_path=args.out,
    )


def pareto_filter(points: list[tuple]) -> list[tuple]:
    """Drop points dominated by another point (both coordinates <=, one <)."""
    kept = []
    seen = set()
    for p in points:
        key = (p[-2], p[-1])
        if key in seen:
            continue
        dominated = any(
            q[-2] >= p[-2] and q[-1] >= p[-1] and (q[-2] > p[-2] or q[-1] > p[-1])
            for q in points
        )
        if not dominated:
            kept.append(p)
            seen.add(key)
    return kept


def _region_throughputs(result) -> tuple[float, float]:
    if isinstance(result, ServiceMetrics):
        return result.R_c, result.R_cbar
    return result.R_c.mean, result.R_cbar.mean


def compute_region(spec: RegionSpec) -> list[list]:
    """Pareto-nondominated (R_c, R_cbar) frontier per allocation scheme."""
    rows = []
    if "non_orthogonal" in spec.schemes:
        points = []
        for g in spec.gamma_grid:
            cfg = spec.base.replace(gamma_c=g, allocation=NON_ORTHOGONAL)
            check_backend_compat(cfg, spec.backend)
            r_c, r_n = _region_throughputs(evaluate_point(cfg, spec.backend))
            points.append(("non_orthogonal", g, "", r_c, r_n))
        rows.extend(pareto_filter(points))
    if "tdma" in spec.schemes:
        points = []
        for g in spec.gamma_grid:
            for a in spec.alpha_grid:
                cfg = spec.base.replace(gamma_c=g, allocation=Tdma(alpha=a))
                check_backend_compat(cfg, spec.backend)
                r_c, r_n = _region_throughputs(evaluate_point(cfg, spec.backend))
                points.append(("tdma", g, a, r_c, r_n))
        rows.extend(pareto_filter(points))
    if spec.out_path:
        write_csv(spec.out_path, ["scheme", "gamma_c", "alpha", "R_c", "R_cbar"], rows)
    return rows


# ============================================================================
#  Analytic-vs-simulation validation
# ============================================================================

_VALIDATE_DEFAULTS = {
    "L": (1, 2, 3, 5),
    "eps1": (0.1, 0.5, 0.9),
    "eps2": (0.1, 0.5, 0.9),
    "load": (0.25, 1.0, 2.0, 4.0),
    "gamma_c": (0.1, 0.5, 0.9),
    "K": (0, 1, 2, 5),
}


@dataclass(frozen=True)
class ValidationCell:
    cfg: ScenarioConfig
    metric: str
    analytic: float
    simulated: float
    std_error: float
    z: float
    status: str  # ok | warn | fail | error


@dataclass(frozen=True)
class ValidationReport:
    cells: tuple
    passed: bool
    seed: int
    target_se: float
    n_errors: int

    @property
    def max_abs_z(self) -> float:
        zs = [abs(c.z) for c in self.cells if c.status != "error"]
        return max(zs) if zs else 0.0


def default_validation_grid(overrides: dict | None = None) -> list[ScenarioConfig]:
    """Collision-model grid over (L, eps1, eps2, per-slot load, gamma_c, K).

    Instantiated at T = 1, where the frame-tagged PSR estimator's
    conditioning coincides exactly with the analytic normalized-Poisson
    conditioning.
    """
    grid = dict(_VALIDATE_DEFAULTS)
    if overrides:
        grid.update(overrides)
    configs = []
    for L in grid["L"]:
        for e1 in grid["eps1"]:
            for e2 in grid["eps2"]:
                for load in grid["load"]:
                    for gc in grid["gamma_c"]:
                        for k in grid["K"]:
                            configs.append(
                                ScenarioConfig(
                                    L=int(L),
                                    T=1,
                                    G=float(load),
                                    gamma_c=float(gc),
                                    channel=ErasureParams(float(e1), float(e2)),
                                    K=k if is_infinite(k) else int(k),
                                )
                            )
    return configs


def _z_score(analytic: float, estimate) -> tuple[float, float, float]:
    se = estimate.std_error
    diff = estimate.mean - analytic
    if se == 0.0:
        z = 0.0 if abs(diff) <= 1e-12 else math.inf
    else:
        z = diff / se
    return estimate.mean, se, z


def validate(
    grid=None,
    target_se: float = 0.002,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    analytic_fn=None,
    max_frames: int = 4_000_000,
) -> ValidationReport:
    """Analytic-vs-simulation oracle over a config grid.

    Groups configs that differ only in K onto one shared realization.  The
    frame budget per group targets ``target_se`` on the scarcest metric
    (PSR trials of the rarer class).  Pass/fail: |z| <= 3 on at least 99%
    of scored cells and no |z| > 5 (and no per-cell backend errors).
    """
    if target_se <= 0:
        raise ValueError("target_se must be positive")
    if analytic_fn is None:
        analytic_fn = analytic_erasure.evaluate_erasure
    if grid is None:
        grid = default_validation_grid()
    if not grid:
        raise ValueError("validation grid is empty")

    groups: dict = {}
    for cfg in grid:
        e = cfg.erasure
        key = (cfg.L, cfg.T, cfg.G, cfg.gamma_c, e.eps1, e.eps2, cfg.allocation)
        groups.setdefault(key, []).append(cfg)

    trials_target = int(math.ceil(0.25 / target_se**2))
    cells = []
    n_errors = 0
    for key, cfgs in groups.items():
        base = cfgs[0]
        active = [
            1.0 - math.exp(-base.gamma_c * base.G),
            1.0 - math.exp(-(1.0 - base.gamma_c) * base.G),
        ]
        p_min = min(p for p in active if p > 0) if any(p > 0 for p in active) else 1.0
        n_frames = min(max_frames, int(math.ceil(1.05 * trials_target / p_min)) + 500)
        k_values = [c.K for c in cfgs]
        try:
            sim_by_k = sim_erasure.simulate_multi_k(base, k_values, n_frames, seed, workers)
        except Exception as exc:  # surfaced per-cell, run continues
            for cfg in cfgs:
                for metric in ("R_c", "R_cbar", "Gamma_c", "Gamma_cbar"):
                    cells.append(
                        ValidationCell(cfg, metric, math.nan, math.nan, math.nan,
                                       math.nan, f"error: {exc}")
                    )
                    n_errors += 1
            continue
        for cfg in cfgs:
            sim = sim_by_k[cfg.K]
            try:
                ana = analytic_fn(cfg)
            except Exception as exc:
                for metric in ("R_c", "R_cbar", "Gamma_c", "Gamma_cbar"):
                    cells.append(
                        ValidationCell(cfg, metric, math.nan, math.nan, math.nan,
                                       math.nan, f"error: {exc}")
                    )
                    n_errors += 1
                continue
            for metric in ("R_c", "R_cbar", "Gamma_c", "Gamma_cbar"):
                mean, se, z = _z_score(getattr(ana, metric), getattr(sim, metric))
                if abs(z) <= 3.0:
                    status = "ok"
                elif abs(z) <= 5.0:
                    status = "warn"
                else:
                    status = "fail"
                cells.append(
                    ValidationCell(cfg, metric, getattr(ana, metric), mean, se, z, status)
                )

    scored = [c for c in cells if not c.status.startswith("error")]
    n_ok = sum(1 for c in scored if c.status == "ok")
    n_fail = sum(1 for c in scored if c.status == "fail")
    passed = (
        n_errors == 0
        and len(scored) > 0
        and n_ok / len(scored) >= 0.99
        and n_fail == 0
    )
    return ValidationReport(
        cells=tuple(cells), passed=passed, seed=seed, target_se=target_se,
        n_errors=n_errors,
    )


def validation_rows(report: ValidationReport) -> tuple[list[str], list[list]]:
    header = [
        "L", "T", "G", "eps1", "eps2", "gamma_c", "K", "metric",
        "analytic", "simulated", "std_error", "z", "status", "seed",
    ]
    rows = []
    for c in report.cells:
        e = c.cfg.erasure
        rows.append(
            [
                c.cfg.L, c.cfg.T, c.cfg.G, e.eps1, e.eps2, c.cfg.gamma_c,
                c.cfg.K, c.metric, c.analytic, c.simulated, c.std_error,
                c.z, c.status, report.seed,
            ]
        )
    return header, rows


def render_validation_summary(report: ValidationReport) -> str:
    scored = [c for c in report.cells if not c.status.startswith("error")]
    n_ok = sum(1 for c in scored if c.status == "ok")
    n_warn = sum(1 for c in scored if c.status == "warn")
    n_fail = sum(1 for c in scored if c.status == "fail")
    lines = [
        f"validation cells: {len(report.cells)} "
        f"(ok {n_ok}, warn {n_warn}, fail {n_fail}, errors {report.n_errors})",
        f"max |z| = {report.max_abs_z:.3f}, target std error = "
        f"{fmt_value(report.target_se)}, seed = {report.seed}",
        f"result: {'PASS' if report.passed else 'FAIL'}",
    ]
    for c in report.cells:
        if c.status in ("warn", "fail") or c.status.startswith("error"):
            e = c.cfg.erasure
            lines.append(
                f"  [{c.status}] L={c.cfg.L} G={fmt_value(c.cfg.G)} "
                f"eps=({e.eps1},{e.eps2}) gamma_c={c.cfg.gamma_c} "
                f"K={fmt_value(c.cfg.K)} {c.metric}: "
                f"analytic={fmt_value(c.analytic)} sim={fmt_value(c.simulated)} "
                f"z={fmt_value(c.z)}"
            )
    return "\n".join(lines)


def _validate_grid_from_config(parser) -> list[ScenarioConfig]:
    if parser is None or "validate" not in parser:
        return default_validation_grid()
    sec = parser["validate"]
    overrides = {}
    for key in ("L", "eps1", "eps2", "load", "gamma_c"):
        if key.lower() in sec:
            values = _float_list(sec[key.lower()])
            overrides[key] = tuple(int(v) if key == "L" else v for v in values)
    if "k" in sec:
        overrides["K"] = tuple(_parse_tolerance(v) for v in sec["k"].split())
    return default_validation_grid(overrides)


# ============================================================================
#  Command-line interface
# ============================================================================


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twohop-aloha",
        description="Two-hop grant-free slotted-ALOHA performance toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_config=True):
        p.add_argument("--config", required=needs_config, help="scenario file (INI)")
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--seed", type=int, default=None, help="master RNG seed")
        p.add_argument("--frames", type=int, default=None, help="simulated frames")
        p.add_argument("--slots", type=int, default=None, help="simulated slots")
        p.add_argument("--backend", default=None, help="evaluation backend")
        p.add_argument("--workers", type=int, default=None, help="parallel workers")

    for name, help_text in [
        ("eval", "closed-form / exact metrics for one scenario"),
        ("sim", "erasure-channel Monte Carlo for one scenario"),
        ("fading", "fading-channel Monte Carlo for one scenario"),
        ("sweep", "parameter sweep to CSV"),
        ("region", "throughput-region frontier to CSV"),
    ]:
        add_common(sub.add_parser(name, help=help_text))
    p_val = sub.add_parser("validate", help="analytic-vs-simulation oracle report")
    add_common(p_val, needs_config=False)
    p_val.add_argument("--target-se", type=float, default=0.002)
    return parser


def _metrics_lines(result, seed=None) -> list[str]:
    lines = []
    if isinstance(result, ServiceMetrics):
        for name in ("R_c", "R_cbar", "Gamma_c", "Gamma_cbar"):
            lines.append(f"{name} = {fmt_value(getattr(result, name))}")
    else:
        for name in ("R_c", "R_cbar", "Gamma_c", "Gamma_cbar"):
            est = getattr(result, name)
            lines.append(
                f"{name} = {fmt_value(est.mean)} +- {fmt_value(est.std_error)}"
            )
        if result.flags:
            lines.append("flags = " + ",".join(result.flags))
        if seed is not None:
            lines.append(f"seed = {seed}")
    return lines


def _cmd_point(args, backend_name: str) -> int:
    parser = load_config_file(args.config)
    cfg = scenario_from_config(parser)
    if backend_name == "eval":
        if cfg.receiver == Receiver.SUPERPOSITION:
            backend = backend_from_config(parser, "superposition", args)
        else:
            backend = AnalyticBackend()
    else:
        backend = backend_from_config(parser, backend_name, args)
    check_backend_compat(cfg, backend)
    result = evaluate_point(cfg, backend)
    seed = _backend_seed(backend)
    for line in _metrics_lines(result, seed):
        print(line)
    if args.out:
        stochastic = _backend_is_stochastic(backend)
        header = ["R_c", "R_cbar", "Gamma_c", "Gamma_cbar"]
        row = _metric_row(result)
        if stochastic:
            if isinstance(result, ServiceMetrics):
                row += [0.0, 0.0, 0.0, 0.0]
            header += ["R_c_se", "R_cbar_se", "Gamma_c_se", "Gamma_cbar_se", "seed"]
            row += [seed]
        write_csv(args.out, header, [row])
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "eval":
            return _cmd_point(args, "eval")
        if args.command == "sim":
            return _cmd_point(args, "sim")
        if args.command == "fading":
            return _cmd_point(args, "fading")
        if args.command == "sweep":
            parser = load_config_file(args.config)
            cfg = scenario_from_config(parser)
            spec = sweep_spec_from_config(parser, cfg, args)
            run_sweep(spec)
            print(f"wrote {spec.out_path} ({len(spec.values)} rows)")
            return EXIT_OK
        if args.command == "region":
            parser = load_config_file(args.config)
            cfg = scenario_from_config(parser)
            spec = region_spec_from_config(parser, cfg, args)
            rows = compute_region(spec)
            print(f"wrote {spec.out_path} ({len(rows)} frontier points)")
            return EXIT_OK
        if args.command == "validate":
            parser = load_config_file(args.config) if args.config else None
            grid = _validate_grid_from_config(parser)
            seed = args.seed if args.seed is not None else DEFAULT_SEED
            report = validate(
                grid,
                target_se=args.target_se,
                seed=seed,
                workers=args.workers or 1,
            )
            print(render_validation_summary(report))
            if args.out:
                header, rows = validation_rows(report)
                write_csv(args.out, header, rows)
            return EXIT_OK if report.passed else EXIT_VALIDATION
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
