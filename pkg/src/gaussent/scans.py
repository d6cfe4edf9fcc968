"""Parameter scans over chain configurations and their CSV/JSON output.

Each scan expands its grids in the fixed order ``N, kappa, alpha, l``,
evaluates the points (optionally on a thread pool) and returns the rows in
grid order, so output files are reproducible byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import __version__
from .cft import fit_log_sin, fit_size_scaling, is_conformal
from .chain import (
    ChainConfig,
    Region,
    coupling_matrix,
    ground_state_moments,
    half_region,
    reduce_region,
    region_spectrum,
)
from .dynamics import QuadraticModel, evolve
from .errors import ScanSpecError
from .spectrum import (
    ModeSpectrum,
    entropy,
    entropy_terms,
    mode_spectrum_from_moments,
    product_identification,
    top_eigenvalues,
)
from .state import KernelParams, moments_from_params

log = logging.getLogger(__name__)

KINDS = ("kappa-scan", "size-scan", "sigma-scan", "spectrum", "evolve", "fit")
DEFAULT_MEASURES = {
    "kappa-scan": ("entropy", "e2"),
    "size-scan": ("entropy",),
    "sigma-scan": ("entropy",),
}


def parse_measure(text: str) -> tuple[str, int | None]:
    """``entropy`` -> ("S", None); ``e2`` -> ("E_2", 2); ``eM:5`` -> ("E_5", 5)."""
    t = text.strip()
    if t == "entropy":
        return "S", None
    if t.lower() == "e2":
        return "E_2", 2
    if t.lower().startswith("em:"):
        try:
            m = int(t.split(":", 1)[1])
        except ValueError as exc:
            raise ScanSpecError(f"bad measure {text!r}") from exc
        if m < 2:
            raise ScanSpecError("E_M needs M >= 2")
        return f"E_{m}", m
    raise ScanSpecError(f"unknown measure {text!r}; use entropy, e2 or eM:<M>")


@dataclass(frozen=True)
class ScanSpec:
    kind: str
    sites: tuple[int, ...] = ()
    kappas: tuple[float, ...] = ()
    alphas: tuple[int, ...] = (0,)
    region_lengths: tuple[int, ...] = ()
    region_start: int = 0
    sigma: float = 0.5
    measures: tuple[str, ...] = ()
    length: float = 1.0
    lattice_const: float | None = None
    log_base: str = "2"
    fit: bool = False
    trim: bool = False
    top_k: int = 0
    term_floor: float = 1e-10
    t_final: float = 0.0
    dt: float = 1e-3
    sample_every: int = 1
    quench_kappa: float | None = None
    theta_file: str | None = None
    omega_file: str | None = None
    input_file: str | None = None
    fit_model: str = "log-sin"
    threads: int = 1
    strict: bool = False
    precision: int = 12
    dps: int | None = None
    max_evals: int = 10**6
    output: str | None = None
    fmt: str = "csv"

    @property
    def base(self):
        return "e" if self.log_base == "e" else 2

    @property
    def measure_list(self) -> tuple[str, ...]:
        return self.measures or DEFAULT_MEASURES.get(self.kind, ("entropy",))

    def chain(self, n_sites: int, kappa: float, alpha: int) -> ChainConfig:
        if self.lattice_const is not None:
            return ChainConfig(n_sites, kappa, alpha, self.lattice_const)
        return ChainConfig.with_length(n_sites, kappa, alpha, self.length)

    def n_evaluations(self) -> int:
        if self.kind in ("kappa-scan", "size-scan"):
            return len(self.sites) * len(self.kappas) * len(self.alphas)
        if self.kind == "sigma-scan":
            per = len(self.region_lengths) or max(self.sites[0] - 1, 0)
            return len(self.kappas) * len(self.alphas) * per
        if self.kind == "evolve":
            return max(1, int(np.ceil(self.t_final / self.dt)))
        return 1

    def check(self) -> None:
        if self.kind not in KINDS:
            raise ScanSpecError(f"unknown scan kind {self.kind!r}")
        if self.fmt not in ("csv", "json"):
            raise ScanSpecError(f"unknown output format {self.fmt!r}")
        if self.log_base not in ("2", "e"):
            raise ScanSpecError("log base must be 2 or e")
        if self.threads < 1 or self.precision < 1:
            raise ScanSpecError("threads and precision must be positive")
        if self.dps is not None and self.dps < 16:
            raise ScanSpecError("--dps must be at least 16 digits")
        for m in self.measure_list:
            parse_measure(m)
        if self.kind == "fit":
            if not self.input_file:
                raise ScanSpecError("fit needs an input file")
            if self.fit_model not in ("log-sin", "size"):
                raise ScanSpecError("fit model must be log-sin or size")
            return
        needs_chain = self.kind != "evolve" or self.theta_file is None
        if needs_chain:
            for name in ("sites", "kappas", "alphas"):
                if not getattr(self, name):
                    raise ScanSpecError(f"{self.kind} needs a non-empty {name} grid")
            if any(a not in (0, 1) for a in self.alphas):
                raise ScanSpecError("alpha values must be 0 or 1")
            if any(n < 1 for n in self.sites):
                raise ScanSpecError("site counts must be positive")
        if self.kind in ("sigma-scan", "spectrum", "evolve") and needs_chain and len(self.sites) != 1:
            raise ScanSpecError(f"{self.kind} takes a single system size")
        if self.kind == "sigma-scan" and self.sites[0] < 2 and not self.region_lengths:
            raise ScanSpecError("sigma-scan needs at least two sites")
        if not 0 < self.sigma <= 1:
            raise ScanSpecError("sigma must lie in (0, 1]")
        total = self.n_evaluations()
        if total > self.max_evals:
            raise ScanSpecError(f"scan needs {total} evaluations, above the cap of {self.max_evals}")

    def echo(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()}


@dataclass
class ScanResult:
    kind: str
    columns: tuple[str, ...]
    rows: list[tuple]
    provenance: dict
    fits: list[dict] = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def _pmap(fn: Callable, tasks: list, threads: int) -> list:
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def _measures(spec: ModeSpectrum, measures: Iterable[str], base) -> tuple:
    out = []
    for m in measures:
        _, order = parse_measure(m)
        out.append(entropy(spec, base) if order is None else product_identification(spec, order))
    return tuple(out)


def _spectrum(spec: ScanSpec, config: ChainConfig, region: Region) -> ModeSpectrum:
    if spec.dps:
        return region_spectrum(config, region, spec.dps)
    moments = reduce_region(ground_state_moments(config), region)
    return mode_spectrum_from_moments(moments, strict=spec.strict)


def _region_task(spec: ScanSpec):
    measures = spec.measure_list

    def task(args):
        return _measures(_spectrum(spec, *args), measures, spec.base)

    return task


def _measure_columns(spec: ScanSpec, entropy_name: str) -> tuple[str, ...]:
    return tuple(entropy_name if parse_measure(m)[1] is None else parse_measure(m)[0]
                 for m in spec.measure_list)


def _provenance(spec: ScanSpec) -> dict:
    return {"tool": "gaussent", "version": __version__, **spec.echo()}


def run_kappa_scan(spec: ScanSpec) -> ScanResult:
    """Half-size (or fraction ``sigma``) measures over ``N x kappa x alpha``."""
    tasks, keys = [], []
    for n in spec.sites:
        for kappa in spec.kappas:
            for alpha in spec.alphas:
                config = spec.chain(n, kappa, alpha)
                tasks.append((config, half_region(config, spec.sigma)))
                keys.append((n, kappa, alpha))
    values = _pmap(_region_task(spec), tasks, spec.threads)
    columns = ("N", "kappa", "alpha") + _measure_columns(spec, "S_max")
    rows = [k + v for k, v in zip(keys, values)]
    return ScanResult(spec.kind, columns, rows, _provenance(spec))


def run_size_scan(spec: ScanSpec) -> ScanResult:
    """Same grid as the kappa scan, optionally fitting ``S_max`` against ``log N``."""
    result = run_kappa_scan(spec)
    if spec.fit:
        entropy_col = result.columns.index("S_max") if "S_max" in result.columns else None
        if entropy_col is None:
            raise ScanSpecError("size-scan fit needs the entropy measure")
        for kappa in spec.kappas:
            for alpha in spec.alphas:
                pts = [(r[0], r[entropy_col]) for r in result.rows if r[1] == kappa and r[2] == alpha]
                fit = fit_size_scaling(pts, base=spec.base)
                result.fits.append({"kappa": kappa, "alpha": alpha, **fit.to_dict(),
                                    "conformal": is_conformal(fit)})
    return result


def run_sigma_scan(spec: ScanSpec) -> ScanResult:
    """Entropy profile over region lengths at fixed ``N``, with optional log-sin fits."""
    n = spec.sites[0]
    lengths = spec.region_lengths or tuple(range(1, n))
    tasks, keys = [], []
    for kappa in spec.kappas:
        for alpha in spec.alphas:
            config = spec.chain(n, kappa, alpha)
            for ell in lengths:
                tasks.append((config, Region(spec.region_start, ell)))
                keys.append((kappa, alpha, ell, ell / n))
    values = _pmap(_region_task(spec), tasks, spec.threads)
    columns = ("kappa", "alpha", "l", "sigma") + _measure_columns(spec, "S")
    rows = [k + v for k, v in zip(keys, values)]
    result = ScanResult(spec.kind, columns, rows, _provenance(spec))
    if spec.fit:
        if "S" not in columns:
            raise ScanSpecError("sigma-scan fit needs the entropy measure")
        s_col = columns.index("S")
        for kappa in spec.kappas:
            for alpha in spec.alphas:
                pts = [(r[3], r[s_col]) for r in rows if r[0] == kappa and r[1] == alpha and r[3] < 1]
                fit = fit_log_sin(pts, trim=spec.trim, base=spec.base)
                result.fits.append({"kappa": kappa, "alpha": alpha, **fit.to_dict(),
                                    "conformal": is_conformal(fit)})
    return result


def run_spectrum_report(spec: ScanSpec) -> ScanResult:
    """Sorted per-mode entropy terms with running sum, plus the largest eigenvalues."""
    config = spec.chain(spec.sites[0], spec.kappas[0], spec.alphas[0])
    ell = spec.region_lengths[0] if spec.region_lengths else half_region(config, spec.sigma).length
    mode_spec = _spectrum(spec, config, Region(spec.region_start, ell))
    terms = [float(t) for t in entropy_terms(mode_spec, spec.base) if t > spec.term_floor]
    records = top_eigenvalues(mode_spec, spec.top_k) if spec.top_k else []
    rows, running = [], 0.0
    for rank in range(1, max(len(terms), len(records)) + 1):
        s_n = terms[rank - 1] if rank <= len(terms) else None
        if s_n is not None:
            running += s_n
        rec = records[rank - 1] if rank <= len(records) else None
        rows.append((
            rank,
            s_n,
            running if s_n is not None else None,
            rec.value if rec else None,
            " ".join(map(str, rec.occupation)) if rec else None,
        ))
    extras = {
        "xi": [float(x) for x in mode_spec.xi],
        "entropy": entropy(mode_spec, spec.base),
    }
    return ScanResult(spec.kind, ("rank", "s_n", "cumulative_S", "lambda", "occupation"),
                      rows, _provenance(spec), extras=extras)


def _load_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _trajectory_columns(n: int) -> list[str]:
    cols = ["time"]
    cols += [f"Q_{i}_{j}" for i in range(n) for j in range(i, n)]
    cols += [f"P_{i}_{j}" for i in range(n) for j in range(i, n)]
    cols += [f"S_{i}_{j}" for i in range(n) for j in range(n)]
    cols += [f"mean_q_{i}" for i in range(n)]
    cols += [f"mean_p_{i}" for i in range(n)]
    return cols


def run_evolution(spec: ScanSpec) -> ScanResult:
    """Trajectory of the moments, optionally with the entropy of a region per sample."""
    if spec.theta_file:
        initial = moments_from_params(KernelParams.from_dict(_load_json(spec.theta_file)),
                                      strict=spec.strict)
        config = None
    else:
        config = spec.chain(spec.sites[0], spec.kappas[0], spec.alphas[0])
        initial = ground_state_moments(config)
    if spec.omega_file:
        data = _load_json(spec.omega_file)
        model = QuadraticModel(data["omega"], data.get("force"))
    elif config is not None:
        kappa = spec.kappas[0] if spec.quench_kappa is None else spec.quench_kappa
        quench = ChainConfig(config.n_sites, kappa, config.alpha, config.lattice_const)
        model = QuadraticModel(coupling_matrix(quench))
    else:
        raise ScanSpecError("evolving a state file needs an Omega file")

    traj = evolve(initial, model, spec.t_final, spec.dt, spec.sample_every)
    n = initial.n_modes
    iu = np.triu_indices(n)
    columns = _trajectory_columns(n)
    region = Region(spec.region_start, spec.region_lengths[0]) if spec.region_lengths else None
    if region is not None:
        columns.append("S_region")
    rows = []
    for t, state in zip(traj.times, traj.states):
        row = [t]
        row += state.q_mat[iu].tolist() + state.p_mat[iu].tolist() + state.s_mat.ravel().tolist()
        row += state.mean_q.tolist() + state.mean_p.tolist()
        if region is not None:
            row.append(entropy(mode_spectrum_from_moments(reduce_region(state, region)), spec.base))
        rows.append(tuple(row))
    extras = {"step": traj.step, "n_steps": traj.n_steps, "method": traj.method}
    return ScanResult(spec.kind, tuple(columns), rows, _provenance(spec), extras=extras)


def _read_points(path: str, xcol: str, ycol: str) -> list[tuple[float, float]]:
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    try:
        return [(float(r[xcol]), float(r[ycol])) for r in reader]
    except KeyError as exc:
        raise ScanSpecError(f"{path} has no column {exc.args[0]!r}") from exc


def run_fit(spec: ScanSpec) -> ScanResult:
    """Fit points read back from a scan CSV."""
    if spec.fit_model == "log-sin":
        fit = fit_log_sin(_read_points(spec.input_file, "sigma", "S"), trim=spec.trim, base=spec.base)
    else:
        fit = fit_size_scaling(_read_points(spec.input_file, "N", "S_max"), base=spec.base)
    d = fit.to_dict()
    columns = ("slope", "offset", "rms_residual", "max_residual", "n_points", "conformal")
    row = tuple(d[c] for c in columns[:-1]) + (is_conformal(fit),)
    return ScanResult(spec.kind, columns, [row], _provenance(spec), fits=[d])


RUNNERS = {
    "kappa-scan": run_kappa_scan,
    "size-scan": run_size_scan,
    "sigma-scan": run_sigma_scan,
    "spectrum": run_spectrum_report,
    "evolve": run_evolution,
    "fit": run_fit,
}


def run_scan(spec: ScanSpec) -> ScanResult:
    """Validate ``spec`` (including the evaluation cap) and run it."""
    spec.check()
    start = time.perf_counter()
    result = RUNNERS[spec.kind](spec)
    result.wall_time = time.perf_counter() - start
    log.info("%s finished in %.3f s", spec.kind, result.wall_time)
    return result


def format_value(value, precision: int) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.{precision}g}"
    return str(value)


def _json_value(value, precision: int):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(f"{float(value):.{precision}g}")
    if isinstance(value, (list, tuple)):
        return [_json_value(v, precision) for v in value]
    if isinstance(value, dict):
        return {k: _json_value(v, precision) for k, v in value.items()}
    return value


def to_csv(result: ScanResult, precision: int = 12) -> str:
    buf = io.StringIO()
    for key, value in result.provenance.items():
        buf.write(f"# {key}: {json.dumps(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([format_value(v, precision) for v in row])
    for fit in result.fits:
        buf.write(f"# fit_result: {json.dumps(_json_value(fit, precision))}\n")
    for key, value in result.extras.items():
        buf.write(f"# {key}: {json.dumps(value)}\n")
    return buf.getvalue()


def to_json(result: ScanResult, precision: int = 12) -> str:
    doc = {
        "provenance": result.provenance,
        "columns": list(result.columns),
        "rows": [_json_value(list(r), precision) for r in result.rows],
        "fits": _json_value(result.fits, precision),
    }
    # spectra keep full double precision (repr round-trips, at most 17 digits)
    doc.update(result.extras)
    return json.dumps(doc, indent=1) + "\n"


def render(result: ScanResult, fmt: str = "csv", precision: int = 12) -> str:
    return to_json(result, precision) if fmt == "json" else to_csv(result, precision)
