"""Experiment runners behind the command line.

Every runner takes a validated config, an output directory and a tolerance scale,
writes its files and returns a :class:`RunResult` with named assertions.
"""

import csv
import hashlib
import itertools
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .averaging import band_trace, commutator_form_fourier, commutator_form_physical, \
    commutator_lower_form, smooth_plateau, theorem1_bound_check
from .config import check_axes, config_hash, set_key, validate_config
from .conservation import ScalarCLProblem, cl_regularity_check, entropy_defect, fv_solve, kinetic_lift
from .errors import ConfigurationError
from .exponents import compare_theorems, compute_exponents, corollary_exponent, fmt
from .flux import counterexample_family, flux_from_catalog, interval_sweep, nondeg_estimate
from .presets import band_family_datum, band_family_grid, burgers_initial, free_streaming_bump, \
    manufactured_problem
from .spectral.field import PHYSICAL, XV_FOURIER, random_bandlimited, transform
from .spectral.grid import GridSpec
from .spectral.symbols import commutator_lower_bound, eval_commutator_symbol
from .transport import TransportProblem, conserved_quantities, export_trajectory, observed_order, \
    solve_duhamel, solve_free_streaming

MANIFEST_VERSION = "1.0"

EXPECTED_NU = {"identity": 1.0, "square": 0.5, "cube": 1.0 / 3.0, "appendix": 0.5}


@dataclass
class Assertion:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self):
        return {"name": self.name, "passed": bool(self.passed), "detail": self.detail}


@dataclass
class RunResult:
    files: list = field(default_factory=list)
    assertions: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def check(self, name, ok, detail=""):
        self.assertions.append(Assertion(name, bool(ok), detail))

    @property
    def passed(self):
        return all(a.passed for a in self.assertions)


def write_csv(path, header, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(x) for x in r])
    return path


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, Fraction):
        return fmt(x)
    return x


def write_json(path, obj):
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, default=_json_default))
    return path


def _json_default(o):
    if isinstance(o, Fraction):
        return fmt(o)
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def _grid(spec, **extra):
    return GridSpec(**{**spec, **extra})


# -- runners ----------------------------------------------------------------------------

def run_solve(p, out, tol, seed):
    res = RunResult()
    grid = _grid(p["grid"], T=p["T"], dt=p["dt"])
    if p["initial"] == "manufactured":
        rows, errors = [], []
        for lev in range(p["dt_levels"]):
            dt = p["dt"] / 2 ** lev
            prob, exact = manufactured_problem(grid, eps=p["eps"], T=p["T"], dt=dt, n_save=p["n_save"])
            traj = solve_duhamel(prob)
            err = float(np.max(np.abs(transform(traj.slices[-1], PHYSICAL).data - exact(p["T"]).data)))
            errors.append(err)
            rows.append([dt, err, traj.residual])
        orders = [float("nan")] + list(observed_order(errors)) if len(errors) > 1 else [float("nan")]
        res.files.append(write_csv(out / "convergence.csv", ["dt", "error", "weak_residual", "observed_order"],
                                   [r + [o] for r, o in zip(rows, orders)]))
        res.files += export_trajectory(traj, out / "slices")
        res.summary = {"error": errors[-1], "dt": p["dt"] / 2 ** (p["dt_levels"] - 1)}
        if len(errors) > 1:
            res.summary["observed_order"] = float(np.min(orders[1:]))
            res.check("observed order >= 1.9", np.min(orders[1:]) >= 1.9 / tol, f"orders {orders[1:]}")
        return res
    f0 = free_streaming_bump(grid)
    prob = TransportProblem(grid, f0, eps=p["eps"], alpha=p["alpha"], T=p["T"],
                            save_times=np.linspace(0, p["T"], p["n_save"]), dt=p["dt"])
    traj = solve_free_streaming(prob)
    res.files += export_trajectory(traj, out / "slices")
    l2 = np.array([r["l2_norm"] for r in traj.diagnostics])
    drift = float(np.max(np.abs(l2 - l2[0])) / l2[0])
    res.summary = {"l2_drift": drift}
    res.check("L2 drift <= 1e-12 (g = 0)", drift <= 1e-12 * tol, f"drift {drift:.3e}")
    return res


def run_commutator(p, out, tol, seed):
    res = RunResult()
    rng = np.random.default_rng(seed)
    rows, worst, violations = [], 0.0, 0
    t0 = time.perf_counter()
    for gi, gspec in enumerate(p["grids"]):
        grid = _grid(gspec)
        sym = eval_commutator_symbol(grid.xi_vectors(), grid.zeta_vectors())
        low = commutator_lower_bound(grid.xi_vectors(), grid.zeta_vectors())
        violations += int(np.count_nonzero(sym < low))
        kx = max(1, int(p["band_fraction"] * grid.N_x))
        kv = max(1, int(p["band_fraction"] * grid.N_v))
        for i in range(p["n_fields"]):
            f = random_bandlimited(grid, rng, kx=kx, kv=kv)
            a = commutator_form_fourier(transform(f, XV_FOURIER))
            b = commutator_form_physical(transform(f, PHYSICAL))
            rel = abs(a - b) / max(abs(a), 1e-300)
            worst = max(worst, rel)
            rows.append([gi, i, a, b, rel, commutator_lower_form(f)])
    elapsed = time.perf_counter() - t0
    res.files.append(write_csv(out / "commutator.csv",
                               ["grid", "field", "fourier", "physical", "rel_diff", "lower_form"], rows))
    res.summary = {"max_rel_diff": worst, "violations": violations, "seconds": elapsed}
    res.check("physical = fourier to 1e-10", worst <= 1e-10 * tol, f"max rel diff {worst:.3e}")
    res.check("symbol >= lower bound on every grid point", violations == 0, f"{violations} violations")
    res.check("forms >= lower bound", all(r[2] >= r[5] * (1 - 1e-12) for r in rows))
    return res


def run_theorem1(p, out, tol, seed):
    res = RunResult()
    grid = _grid(p["grid"], T=p["T"])
    f0 = free_streaming_bump(grid)
    eps_list = p["eps"] if isinstance(p["eps"], list) else [p["eps"]]
    reports = []
    for eps in eps_list:
        prob = TransportProblem(grid, f0, eps=float(eps), T=p["T"], save_times=np.linspace(0, p["T"], p["n_save"]))
        reports.append(theorem1_bound_check(solve_free_streaming(prob), p=_as_float(p["p"])))
    ratios = np.array([r.ratio for r in reports])
    spread = float(ratios.max() / ratios.min())
    res.files.append(write_json(out / "theorem1.json", {"version": MANIFEST_VERSION, "factor": p["factor"],
                                                        "spread": spread, "rows": [r.to_dict() for r in reports]}))
    res.files.append(write_csv(out / "theorem1.csv", ["eps", "lhs", "rhs", "ratio"],
                               [[r.eps, r.lhs, r.rhs, r.ratio] for r in reports]))
    res.summary = {"ratio": float(ratios[0])} if len(reports) == 1 else {"spread": spread}
    res.check("ratios finite", bool(np.all(np.isfinite(ratios))))
    if len(reports) > 1:
        res.check(f"ratio spread <= {p['factor']}", spread <= p["factor"] * tol, f"spread {spread:.3f}")
    return res


def _as_float(x):
    return float("inf") if x == "inf" else float(Fraction(str(x)))


def band_refinement(Ns, v_mult=16, eps=0.5, T=1.0, n_save=401, beta=1.5):
    """Band traces of the power-law free-streaming family on an ``N_x = N`` ladder."""
    traces = []
    for N in Ns:
        grid = band_family_grid(N, v_mult)
        prob = TransportProblem(grid, band_family_datum(grid, beta), eps=eps, T=T,
                                save_times=np.linspace(0, T, n_save))
        traces.append(band_trace(solve_free_streaming(prob), phi=smooth_plateau(1.5, 1.0)))
    return traces


def refinement_slope(Ns, traces):
    if len(Ns) < 2:
        return 0.0
    return float(np.polyfit(np.log(Ns), np.log([t.max_ratio for t in traces]), 1)[0])


def run_bands(p, out, tol, seed):
    res = RunResult()
    traces = band_refinement(p["N"], p["v_mult"], p["eps"], p["T"], p["n_save"], p["beta"])
    rows = []
    for N, tr in zip(p["N"], traces):
        res.files.append(tr.to_json(out / f"bands_N{N}.json"))
        res.files.append(tr.to_csv(out / f"bands_N{N}.csv"))
        rows.append([N, tr.max_ratio, tr.summed_ratio, len(tr.active)])
    slope = refinement_slope(p["N"], traces)
    res.files.append(write_csv(out / "refinement.csv", ["N", "max_ratio", "summed_ratio", "bands"], rows))
    res.summary = {"slope": slope, "max_ratio": max(t.max_ratio for t in traces)}
    res.check("all band ratios finite", all(t.verdict == "bounded" for t in traces))
    res.check("A_k real", all(b.imag_residual < 1e-10 for t in traces for b in t.active))
    res.check(f"|slope| <= {p['slope_tol']}", abs(slope) <= p["slope_tol"] * tol, f"slope {slope:.4f}")
    return res


def run_exponents(p, out, tol, seed):
    res = RunResult()
    rows = []
    if p["preset"] == "corollary1":
        for a in p["alpha"]:
            alpha = Fraction(str(a))
            rep = compute_exponents(n=1, alpha=alpha, gamma="inf", p1=2, p2=2, q1=2, q2=2)
            expected = corollary_exponent(alpha)
            rows.append({"alpha": fmt(alpha), "S": fmt(rep.S), "expected": fmt(expected),
                         "equal": rep.S == expected, "report": rep.to_dict()})
        res.check("S = 1/(2(alpha+1)) exactly", all(r["equal"] for r in rows))
    for inp in p["inputs"]:
        rep = compute_exponents(**inp)
        rows.append({"input": inp, "S": fmt(rep.S), "report": rep.to_dict()})
    res.files.append(write_json(out / "exponents.json", {"version": MANIFEST_VERSION, "rows": rows}))
    res.files.append(write_csv(out / "exponents.csv", ["alpha", "S"],
                               [[r.get("alpha", ""), r["S"]] for r in rows]))
    res.summary = {"rows": len(rows)}
    return res


def run_compare(p, out, tol, seed):
    res = RunResult()
    rep = compare_theorems(n=p["n"], alpha=Fraction(str(p["alpha"])), p=p["p"], q=p.get("q"), p2=p.get("p2", 2))
    path = write_json(out / "compare.json", rep.to_dict())
    res.files.append(path)
    res.files.append(emit_plot_data(path, "comparison", out / "compare_tidy.csv"))
    res.summary = {c.second: c.verdict for c in rep.comparisons}
    return res


def run_flux(p, out, tol, seed):
    res = RunResult()
    rows = []
    for name in p["names"]:
        fl = flux_from_catalog(name)
        rep = nondeg_estimate(fl, n_directions=p["n_directions"], n_samples=p["n_samples"], seed=seed)
        rows.append(rep.to_dict())
        if name in EXPECTED_NU:
            ok = (not rep.degenerate) and abs(rep.nu - EXPECTED_NU[name]) <= p["tol"] * tol
            res.check(f"nu({name}) = {EXPECTED_NU[name]:.4g} +- {p['tol']}", ok, rep.message)
        elif name == "constant":
            res.check("constant flux degenerate", rep.degenerate, rep.message)
    res.files.append(write_json(out / "nondegeneracy.json", {"version": MANIFEST_VERSION, "rows": rows}))
    res.files.append(write_csv(out / "nondegeneracy.csv", ["flux", "nu", "c0", "degenerate"],
                               [[r["flux"], r["nu"], r["c0"], r["degenerate"]] for r in rows]))
    res.summary = {r["flux"]: r["nu"] for r in rows}
    return res


def run_appendix(p, out, tol, seed):
    res = RunResult()
    ms = p["m"] if isinstance(p["m"], list) else [p["m"]]
    rows = []
    for m in ms:
        fam = counterexample_family(m)
        rows.append([m, fam["set_measure"], fam["preimage_measure"], fam["ratio"], math.sqrt(m)])
    res.files.append(write_csv(out / "appendix.csv", ["m", "set_measure", "preimage_measure", "ratio", "sqrt_m"],
                               rows))
    worst = max(abs(r[3] - r[4]) for r in rows)
    res.check("ratio = sqrt(m) to 1e-12", worst <= 1e-12 * tol, f"max deviation {worst:.2e}")
    res.summary = {"ratio": rows[0][3]} if len(rows) == 1 else {"max_deviation": worst}
    if p["n_intervals"]:
        sw = interval_sweep(p["n_intervals"], seed=seed)
        res.files.append(write_csv(out / "interval_sweep.csv", ["c", "d", "preimage", "bound", "ratio"], sw))
        viol = int(np.count_nonzero(sw[:, 4] > 1 + 1e-12 * tol))
        res.check("|a^-1(I)| <= sqrt(6)|I|^(1/2)", viol == 0, f"{viol} violations of {len(sw)}")
        res.summary["max_interval_ratio"] = float(sw[:, 4].max())
    return res


def run_burgers(p, out, tol, seed):
    res = RunResult()
    rng = np.random.default_rng(seed)
    sols = []
    for N in p["N"]:
        u0 = burgers_initial(p["initial"], N, rng)
        prob = ScalarCLProblem(u0, "burgers", T=p["T"], cfl=p["cfl"], save_times=np.linspace(0, p["T"], p["n_save"]))
        sols.append(fv_solve(prob))
    sol = sols[-1]
    N = p["N"][-1]
    res.files.append(write_csv(out / f"u_N{N}.csv", ["t", "x", "u"],
                               ([t, x, u] for t, row in zip(sol.times, sol.u) for x, u in zip(sol.x, row))))
    mass = sol.mass()
    res.check("mass conserved to 1e-12", float(np.ptp(mass)) <= 1e-12 * tol * max(1, abs(mass[0])),
              f"drift {np.ptp(mass):.2e}")
    tv = sol.total_variation()
    res.check("total variation non-increasing", bool(np.all(np.diff(tv) <= 1e-12 * tol)))
    kd = kinetic_lift(sol, n_v=p["n_v"])
    res.check("-1 <= f <= 1", kd.bounds_ok)
    res.check("int f dv = u to half-cell", kd.constraint_residual <= 0.5 * kd.dv + 1e-12,
              f"residual {kd.constraint_residual:.3e}, dv {kd.dv:.3e}")
    ed = entropy_defect(kd, lambda v: v)
    jump = 1.0 if p["initial"] in ("pulse", "shock") else None
    summary = {"entropy_rate": ed.mean_rate, "negativity_constant": ed.negativity_constant}
    if jump is not None:
        target = jump ** 3 / 12
        rel = abs(ed.mean_rate - target) / target
        res.check("entropy defect rate within 10% of 1/12", rel <= 0.10 * tol, f"rate {ed.mean_rate:.5f}")
    reg = cl_regularity_check(sols, p["s_values"])
    res.files.append(write_json(out / "regularity.json", reg.to_dict()))
    E = reg.band_energies[-1]
    res.files.append(write_csv(out / "bands.csv", ["N", "k", "E_k", "s", "weighted"],
                               ([N, k, e, s, 2.0 ** (2 * k * s) * e] for s in reg.s_values
                                for k, e in enumerate(E))))
    if p["initial"] in ("pulse", "shock", "smooth"):
        below = [s for s in reg.s_values if s < 0.25]
        res.check("regularity consistent for every s < 1/4",
                  all(reg.verdicts[s]["consistent"] for s in below), f"decay slope {reg.decay_slope:.3f}")
    summary.update({"decay_slope": reg.decay_slope})
    res.summary = summary
    return res


RUNNERS = {"solve": run_solve, "commutator": run_commutator, "theorem1": run_theorem1, "bands": run_bands,
           "exponents": run_exponents, "compare": run_compare, "flux": run_flux, "appendix": run_appendix,
           "burgers": run_burgers}


# -- manifests and sweeps -------------------------------------------------------------------

def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    config: dict
    config_hash: str
    version: str
    started: str
    finished: str
    files: list
    assertions: list
    runs: int = 1
    summary: dict = field(default_factory=dict)
    threads: int = 1

    @property
    def passed(self):
        return all(a["passed"] for a in self.assertions)

    def to_dict(self):
        return {"manifest_version": MANIFEST_VERSION, "artifact_version": self.version,
                "config_hash": self.config_hash, "config": self.config, "started": self.started,
                "finished": self.finished, "threads": self.threads, "runs": self.runs,
                "files": self.files, "assertions": self.assertions, "passed": self.passed,
                "summary": self.summary}

    def write(self, outdir):
        return write_json(Path(outdir) / "manifest.json", self.to_dict())


def _now():
    return datetime.now(timezone.utc).isoformat()


def _file_entries(paths, root):
    root = Path(root)
    seen, out = set(), []
    for p in paths:
        p = Path(p)
        if p in seen or not p.exists():
            continue
        seen.add(p)
        out.append({"path": str(p.relative_to(root)) if p.is_relative_to(root) else str(p),
                    "sha256": sha256_file(p)})
    return out


def run(cfg, outdir, threads=1):
    """Validate ``cfg``, execute it into ``outdir`` and write ``manifest.json``."""
    cfg = validate_config(cfg)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    started = _now()
    write_json(outdir / "config.json", cfg)
    if cfg["kind"] == "sweep":
        return sweep(cfg, outdir, threads=threads, started=started)
    res = _execute(cfg, outdir)
    manifest = RunManifest(cfg, config_hash(cfg), __version__, started, _now(),
                           _file_entries([outdir / "config.json"] + res.files, outdir),
                           [a.to_dict() for a in res.assertions], 1, res.summary, threads)
    manifest.write(outdir)
    return manifest


def _execute(cfg, outdir):
    try:
        return RUNNERS[cfg["kind"]](cfg["params"], Path(outdir), cfg["tolerance_scale"], cfg["seed"])
    except (ArithmeticError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        res = RunResult()
        res.check(f"{cfg['kind']} completed", False, f"{type(exc).__name__}: {exc}")
        return res


def sweep(cfg, outdir, threads=1, started=None):
    """Cartesian product over ``cfg['axes']`` applied to ``cfg['base']``; deterministic run order."""
    started = started or _now()
    axes = cfg.get("axes", [])
    check_axes(axes)
    keys = [a["key"] for a in axes]
    points = list(itertools.product(*[a["values"] for a in axes])) if axes else []
    configs = []
    for vals in points:
        c = dict(cfg["base"])
        for k, v in zip(keys, vals):
            c = set_key(c, k, v)
        configs.append(validate_config(c))
    dirs = [Path(outdir) / f"run_{i:03d}" for i in range(len(configs))]
    for d in dirs:
        d.mkdir(parents=True, exist_ok=True)

    def job(i):
        return _execute(configs[i], dirs[i])

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(job, range(len(configs))))
    files, assertions, rows = [], [], []
    summary_keys = sorted({k for r in results for k in r.summary})
    for i, (vals, r) in enumerate(zip(points, results)):
        files += r.files
        assertions += [{**a.to_dict(), "name": f"run_{i:03d}: {a.name}"} for a in r.assertions]
        rows.append(list(vals) + [r.summary.get(k, "") for k in summary_keys] + [r.passed])
    header = keys + summary_keys + ["passed"]
    if len(keys) == 1 and "error" in summary_keys and len(rows) > 1:
        vals = np.array([float(v[0]) for v in points])
        errs = np.array([r.summary["error"] for r in results])
        order = [float("nan")] + list(np.log(errs[:-1] / errs[1:]) / np.log(vals[:-1] / vals[1:]))
        rows = [row + [o] for row, o in zip(rows, order)]
        header.append("observed_order")
    agg = write_csv(Path(outdir) / "sweep.csv", header, rows)
    manifest = RunManifest(cfg, config_hash(cfg), __version__, started, _now(),
                           _file_entries([Path(outdir) / "config.json", agg] + files, outdir),
                           assertions, len(configs), {"rows": len(rows)}, threads)
    manifest.write(outdir)
    return manifest


# -- tidy plot data ---------------------------------------------------------------------------

def emit_plot_data(result_path, kind, out_path):
    """Reshape a result JSON into a tidy CSV (one observation per row); never renders images."""
    result_path = Path(result_path)
    if not result_path.exists():
        raise ConfigurationError(f"result file {result_path} does not exist")
    data = json.loads(result_path.read_text())
    if kind == "bands":
        if data.get("kind") == "norm_report":
            rows = [[b["k"], b["E_k"], b["weighted"]] for b in data["bands"]]
        elif data.get("kind") == "proof_trace":
            s = float(Fraction(data["exponents"].get("S", "0")))
            rows = [[b["k"], b["energy"], 2.0 ** (2 * b["k"] * s) * b["energy"]] for b in data["bands"]]
        else:
            raise ConfigurationError(f"{result_path} holds no band energies")
        return write_csv(out_path, ["k", "E_k", "weighted_E_k"], rows)
    if kind == "comparison":
        rows = [[t["name"], t["smoothness"], t["integrability"]] for t in data["entries"]]
        return write_csv(out_path, ["theorem", "s", "p"], rows)
    if kind == "eps_sweep":
        rows = [[r["eps"], r["lhs"], r["rhs"], r["ratio"]] for r in data["rows"]]
        return write_csv(out_path, ["eps", "lhs", "rhs", "ratio"], rows)
    raise ConfigurationError(f"unknown plot kind {kind!r}; known: bands, comparison, eps_sweep")
