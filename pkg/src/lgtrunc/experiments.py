"""Preset experiments: measured truncation errors next to their bounds.

Each preset has a frozen dataclass config and a runner returning an
:class:`ExperimentResult` (tables, time series, plot specifications). The
runners are deterministic and free of I/O; :mod:`lgtrunc.cli` writes files.
"""
from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bounds import (
    chain_E2_bound,
    chain_P,
    one_plaquette_E2_bound,
    one_plaquette_projector_estimate,
    schwinger_error_bounds,
    tong_combined,
    tong_energy_bound,
)
from .models import ModelSpec, observable
from .propagate import (
    TimeSeries,
    eigenstate_scaling_scan,
    expectation_series,
    fmt,
    initial_state,
    probability_series,
    truncation_error_series,
)
from .tebd import TebdProtocol, converge_bond_dimension, run_tebd

# ---------------------------------------------------------------------------
# result containers
# ---------------------------------------------------------------------------


def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return fmt(x)
    if x is None:
        return ""
    return str(x)


def parse_cell(text: str):
    """Inverse of the CSV cell rendering (int, float, bool, empty or text)."""
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


@dataclass
class Table:
    """Rows sharing one column layout; cells are numbers, bools or text."""

    name: str
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, **row) -> None:
        unknown = set(row) - set(self.columns)
        if unknown:
            raise KeyError(f"table {self.name!r} has no columns {sorted(unknown)}")
        self.rows.append(row)

    def column(self, name: str) -> list:
        return [r.get(name) for r in self.rows]

    def where(self, **match) -> list[dict]:
        return [r for r in self.rows if all(r.get(k) == v for k, v in match.items())]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for r in self.rows:
                w.writerow([_cell(r.get(c)) for c in self.columns])

    @classmethod
    def from_csv(cls, path, name: str | None = None) -> "Table":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise ValueError(f"{path}: empty CSV")
            rows = [dict(zip(header, map(parse_cell, line))) for line in reader if line]
        return cls(name or str(path), header, rows)


@dataclass
class Curve:
    label: str
    x: list
    y: list
    dashed: bool = False


@dataclass
class Plot:
    """Overlay of measured and bound curves; drawn by :mod:`lgtrunc.svg`."""

    name: str
    title: str
    xlabel: str
    ylabel: str
    curves: list[Curve] = field(default_factory=list)
    xlog: bool = False
    ylog: bool = True


@dataclass
class ExperimentResult:
    name: str
    config: dict
    tables: dict[str, Table] = field(default_factory=dict)
    series: dict[str, TimeSeries] = field(default_factory=dict)
    plots: list[Plot] = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def _log10(x: float) -> float:
    return math.log10(x) if x > 0 else -math.inf


def comparison_tables(name: str, keys: list[str], rows: list[dict], measured: str, bound: str) -> dict[str, Table]:
    """Split ``rows`` into ``<name>_measured`` / ``<name>_bound`` tables for ``compare``."""
    out = {}
    for suffix, col in (("measured", measured), ("bound", bound)):
        t = Table(f"{name}_{suffix}", keys + ["value", "log10_value"])
        for r in rows:
            v = r[col]
            t.add(**{k: r[k] for k in keys}, value=v, log10_value=r.get(f"log10_{col}", _log10(v)))
        out[t.name] = t
    return out


# ---------------------------------------------------------------------------
# single plaquette
# ---------------------------------------------------------------------------

def _plaquette_E2(g: float, lam: int, state: int, T: float, dt: float) -> TimeSeries:
    spec = ModelSpec("u1_plaquette", g, lam)
    return expectation_series(spec.hamiltonian(), initial_state(spec, state),
                              {"E2": observable("E2_link", spec.basis())}, T, dt)


@dataclass(frozen=True)
class Fig1Config:
    g: float = 0.5
    T: float = 30.0
    dt: float = 0.01
    lam_ref: int = 20
    lams: tuple = (5, 6, 7, 8, 9)
    states: tuple = (0, 1, 2)
    lam0: int = 4
    convention: str = "leading"


def fig1(cfg: Fig1Config = Fig1Config()) -> ExperimentResult:
    """Single-plaquette ``<E^2>`` truncation error against the leakage bound."""
    res = ExperimentResult("fig1", dataclasses.asdict(cfg))
    table = Table("fig1", ["state", "lam", "lam0", "measured", "t_max", "bound", "log10_bound", "log10_slack"])
    for state in cfg.states:
        ref = _plaquette_E2(cfg.g, cfg.lam_ref, state, cfg.T, cfg.dt)
        for lam in cfg.lams:
            err = np.abs(ref["E2"] - _plaquette_E2(cfg.g, lam, state, cfg.T, cfg.dt)["E2"])
            i = int(np.argmax(err))
            b = one_plaquette_E2_bound(cfg.g, lam, cfg.lam0, cfg.T, cfg.convention)
            table.add(state=state, lam=lam, lam0=cfg.lam0, measured=float(err[i]), t_max=float(ref.times[i]),
                      bound=float(b), log10_bound=b.log10, log10_slack=b.log10 - _log10(float(err[i])))
            res.series[f"fig1_state{state}_lam{lam}"] = TimeSeries(ref.times, {"error": err},
                                                                   {"state": state, "lam": lam, "g": cfg.g})
    res.tables["fig1"] = table
    res.tables.update(comparison_tables("fig1", ["state", "lam"], table.rows, "measured", "bound"))
    plot = Plot("fig1", "single plaquette: max |d<E^2>| vs bound", "truncation", "max error")
    for state in cfg.states:
        rows = table.where(state=state)
        plot.curves.append(Curve(f"measured n={state}", [r["lam"] for r in rows], [r["measured"] for r in rows]))
        plot.curves.append(Curve(f"bound n={state}", [r["lam"] for r in rows], [r["bound"] for r in rows], True))
    res.plots.append(plot)
    return res


@dataclass(frozen=True)
class Fig2Config:
    g: float = 0.5
    T: float = 30.0
    dt: float = 0.01
    lam: int = 20
    levels: tuple = tuple(range(1, 11))
    lam0: int = 4
    bound_dt: float = 0.5


def fig2(cfg: Fig2Config = Fig2Config()) -> ExperimentResult:
    """Field-projector probabilities in the vacuum with the earlier rigorous bounds."""
    res = ExperimentResult("fig2", dataclasses.asdict(cfg))
    spec = ModelSpec("u1_plaquette", cfg.g, cfg.lam)
    basis = spec.basis()
    obs = {f"Pi_{k}": observable("projector_Pi", basis, lam_prime=k) for k in cfg.levels}
    ts = expectation_series(spec.hamiltonian(), initial_state(spec), obs, cfg.T, cfg.dt,
                            metadata={"g": cfg.g, "lam": cfg.lam})
    res.series["fig2_projectors"] = ts
    stride = max(1, int(round(cfg.bound_dt / cfg.dt)))
    coarse = ts.times[::stride]
    bound_rows = []
    bound_series = {}
    for k in cfg.levels:
        vals = np.array([float(tong_combined(cfg.g, k, float(t)).value) if t > 0 else 0.0 for t in coarse])
        bound_series[f"bound_{k}"] = vals
        for t, b, mval in zip(coarse[1:], vals[1:], ts[f"Pi_{k}"][::stride][1:]):  # t = 0 is trivial
            bound_rows.append({"level": k, "t": float(t), "measured": float(mval), "bound": float(b)})
    res.series["fig2_prior_bounds"] = TimeSeries(coarse, bound_series, {"g": cfg.g})
    table = Table("fig2", ["level", "measured", "t_max", "energy_bound", "energy_violations", "prior_bound_T",
                           "estimate", "log10_estimate"])
    for k in cfg.levels:
        col = ts[f"Pi_{k}"]
        i = int(np.argmax(col))
        energy = float(tong_energy_bound(cfg.g, k).value)
        est = one_plaquette_projector_estimate(cfg.g, k, cfg.lam0, cfg.T) if k > cfg.lam0 else None
        table.add(level=k, measured=float(col[i]), t_max=float(ts.times[i]), energy_bound=energy,
                  energy_violations=int(np.sum(col > energy)),
                  prior_bound_T=float(tong_combined(cfg.g, k, cfg.T).value),
                  estimate=float(est) if est else None, log10_estimate=est.log10 if est else None)
    res.tables["fig2"] = table
    res.tables.update(comparison_tables("fig2", ["level", "t"], bound_rows, "measured", "bound"))
    plot = Plot("fig2", "single plaquette: <Pi_k>(t) and prior bounds", "t", "probability")
    for k in cfg.levels:
        plot.curves.append(Curve(f"Pi_{k}", list(ts.times[::stride]), list(np.maximum(ts[f"Pi_{k}"][::stride], 1e-300))))
        plot.curves.append(Curve(f"prior {k}", list(coarse[1:]), list(bound_series[f"bound_{k}"][1:]), True))
    res.plots.append(plot)
    res.summary = {"max_Pi_10": table.where(level=10)[0]["measured"] if 10 in cfg.levels else None,
                   "energy_violations": int(sum(table.column("energy_violations")))}
    return res


@dataclass(frozen=True)
class Fig3Config:
    g: float = math.sqrt(3.0)
    T: float = 8.0
    dt: float = 0.01
    lam_ref: int = 20
    lams: tuple = tuple(range(1, 9))
    lam0: int = 0


def fig3(cfg: Fig3Config = Fig3Config()) -> ExperimentResult:
    """Largest ``<Pi_lam>`` at strong coupling against the leading-order estimate."""
    res = ExperimentResult("fig3", dataclasses.asdict(cfg))
    spec = ModelSpec("u1_plaquette", cfg.g, cfg.lam_ref)
    obs = {f"Pi_{k}": observable("projector_Pi", spec.basis(), lam_prime=k) for k in cfg.lams}
    ts = expectation_series(spec.hamiltonian(), initial_state(spec), obs, cfg.T, cfg.dt)
    res.series["fig3_projectors"] = ts
    table = Table("fig3", ["lam", "measured", "log10_measured", "t_max", "predicted", "log10_predicted",
                           "log10_ratio"])
    for k in cfg.lams:
        col = ts[f"Pi_{k}"]
        i = int(np.argmax(col))
        p = one_plaquette_projector_estimate(cfg.g, k, cfg.lam0, cfg.T)
        table.add(lam=k, measured=float(col[i]), log10_measured=_log10(float(col[i])), t_max=float(ts.times[i]),
                  predicted=float(p), log10_predicted=p.log10, log10_ratio=p.log10 - _log10(float(col[i])))
    res.tables["fig3"] = table
    res.tables.update(comparison_tables("fig3", ["lam"], table.rows, "measured", "predicted"))
    lams = table.column("lam")
    res.plots.append(Plot("fig3", "single plaquette, g = sqrt 3: max <Pi_lam>", "lam", "probability", [
        Curve("measured", lams, table.column("measured")),
        Curve("predicted", lams, table.column("predicted"), True)]))
    return res


@dataclass(frozen=True)
class EigenscanConfig:
    g: float = 0.5
    lams: tuple = tuple(range(4, 11))
    k_states: int = 1
    lam0: int | None = None
    dps: int | None = 60


def factorial_slope(lams, differences) -> float:
    """Least-squares slope of ``log|dE|`` against ``log(1/(lam!)^2)``."""
    x = np.array([-2 * math.lgamma(lam + 1) for lam in lams])
    y = np.log(np.asarray(differences, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def eigenscan(cfg: EigenscanConfig = EigenscanConfig()) -> ExperimentResult:
    """Convergence of low-lying single-plaquette eigenvalues with the cutoff."""
    res = ExperimentResult("eigenscan", dataclasses.asdict(cfg))
    rows = eigenstate_scaling_scan(cfg.g, cfg.lams, cfg.k_states, cfg.lam0, cfg.dps)
    cols = ["lam", "state", "energy", "difference", "log_difference", "edge_overlap"]
    if cfg.lam0 is not None:
        cols.append("edge_overlap_estimate")
    table = Table("eigenscan", cols)
    for r in rows:
        table.add(**{c: r.get(c) for c in cols})
    res.tables["eigenscan"] = table
    ground = table.where(state=0)
    slope = factorial_slope([r["lam"] for r in ground], [r["difference"] for r in ground])
    res.summary = {"factorial_slope": slope}
    res.plots.append(Plot("eigenscan", "ground-state energy convergence", "lam", "|E(lam+1) - E(lam)|",
                          [Curve("ground state", [r["lam"] for r in ground], [r["difference"] for r in ground])]))
    return res


# ---------------------------------------------------------------------------
# TEBD helpers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TebdSettings:
    """Bond-dimension schedule shared by the TEBD presets; ``size=None`` is the infinite cell."""

    size: int | None = 24
    dt: float = 0.01
    chi: int = 60
    chi_step: int = 10
    chi_max: int = 200
    tolerance_factor: float = 0.1
    converge: bool = True
    measure_every: int = 10
    stage_time: float | None = None
    stage_chi: int | None = None

    def protocol(self, T: float) -> TebdProtocol:
        return TebdProtocol(T=T, dt=self.dt, chi=self.chi, chi_step=self.chi_step, chi_max=self.chi_max,
                            tolerance_factor=self.tolerance_factor, stage_time=self.stage_time,
                            stage_chi=self.stage_chi, measure_every=self.measure_every)


def _converged(run: Callable[[int], TimeSeries], settings: TebdSettings, T: float, columns, target):
    proto = settings.protocol(T)
    if settings.converge:
        return converge_bond_dimension(run, proto, columns, target)
    ts = run(proto.chi)
    return _Single(ts, proto.chi)


@dataclass
class _Single:
    series: TimeSeries
    chi: int
    converged: bool | None = None
    gap: float = math.nan
    history: list = field(default_factory=list)


def _centre(size):
    return 0 if size is None else size // 2


def _convergence_row(lam, conv) -> dict:
    return {"lam": lam, "chi": conv.chi, "converged": conv.converged, "gap": conv.gap,
            "max_discarded": float(conv.series["discarded"][-1]),
            "runs": len(conv.history) + 1}


# ---------------------------------------------------------------------------
# plaquette chain
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Fig4Config:
    g: float = 0.8
    T: float = 8.0
    lam_ref: int = 5
    lams: tuple = (1, 2, 3, 4)
    lam0: int = 1
    convention: str = "leading"
    exact_size: int | None = 3
    tebd: TebdSettings = TebdSettings()


def fig4(cfg: Fig4Config = Fig4Config()) -> ExperimentResult:
    """Chain ``<E^2>`` error at the central plaquette against the chain bound."""
    res = ExperimentResult("fig4", dataclasses.asdict(cfg))
    size = cfg.tebd.size
    centre = _centre(size)
    table = Table("fig4", ["method", "size", "lam", "lam0", "measured", "t_max", "bound", "log10_bound",
                           "log10_slack"])
    conv_table = Table("table1", ["lam", "chi", "converged", "gap", "max_discarded", "runs"],
                       metadata={"g": cfg.g, "T": cfg.T, "size": size})
    bounds = {lam: chain_E2_bound(cfg.g, lam, cfg.lam0, cfg.T, cfg.convention)
              for lam in range(cfg.lam0, cfg.lam_ref + 1)}
    series = {}
    for lam in sorted(set(cfg.lams) | {cfg.lam_ref}):
        # the reference run only needs to resolve the smallest error it is compared with
        target = float(bounds[min(lam, cfg.lam_ref - 1)]) if lam >= cfg.lam0 else float(bounds[cfg.lam0])

        def run(chi, lam=lam):
            return run_tebd("u1_chain", cfg.g, lam, cfg.T, size=size, chi=chi,
                            protocol=cfg.tebd.protocol(cfg.T), observables={"E2": ("E2", centre, None)})

        conv = _converged(run, cfg.tebd, cfg.T, ["E2"], target)
        series[lam] = conv.series
        res.series[f"fig4_tebd_lam{lam}"] = conv.series
        conv_table.add(**_convergence_row(lam, conv))
    ref = series[cfg.lam_ref]
    label = "tebd" if size is not None else "itebd"
    for lam in cfg.lams:
        err = np.abs(series[lam]["E2"] - ref["E2"])
        i = int(np.argmax(err))
        b = bounds[lam]
        table.add(method=label, size=size, lam=lam, lam0=cfg.lam0, measured=float(err[i]),
                  t_max=float(ref.times[i]), bound=float(b), log10_bound=b.log10,
                  log10_slack=b.log10 - _log10(float(err[i])))
    if cfg.exact_size:
        spec = ModelSpec("u1_chain", cfg.g, cfg.lam_ref, size=cfg.exact_size)
        link = cfg.exact_size // 2
        for lam in cfg.lams:
            ts = truncation_error_series(spec, cfg.lam_ref, lam, {"tag": "E2_link", "link": link}, cfg.T,
                                         cfg.tebd.dt)
            i = int(np.argmax(ts["error"]))
            b = bounds[lam]
            table.add(method="exact", size=cfg.exact_size, lam=lam, lam0=cfg.lam0, measured=float(ts["error"][i]),
                      t_max=float(ts.times[i]), bound=float(b), log10_bound=b.log10,
                      log10_slack=b.log10 - _log10(float(ts["error"][i])))
    res.tables["fig4"] = table
    res.tables["table1"] = conv_table
    res.tables.update(comparison_tables("fig4", ["method", "lam"], table.rows, "measured", "bound"))
    plot = Plot("fig4", f"plaquette chain g={cfg.g}: max |d<E^2>| vs bound", "lam", "max error")
    for method in dict.fromkeys(table.column("method")):
        rows = table.where(method=method)
        plot.curves.append(Curve(method, [r["lam"] for r in rows], [r["measured"] for r in rows]))
    plot.curves.append(Curve("bound", list(cfg.lams), [float(bounds[k]) for k in cfg.lams], True))
    res.plots.append(plot)
    return res


@dataclass(frozen=True)
class Table1Config:
    g: float = 0.8
    T: float = 8.0
    lams: tuple = (1, 2, 3, 4, 5)
    lam0: int = 1
    convention: str = "leading"
    tebd: TebdSettings = TebdSettings()


def table1(cfg: Table1Config = Table1Config()) -> ExperimentResult:
    """Bond dimension at which consecutive chain runs agree, per truncation."""
    lam_ref = max(cfg.lams)
    sub = Fig4Config(g=cfg.g, T=cfg.T, lam_ref=lam_ref, lams=tuple(k for k in cfg.lams if k < lam_ref),
                     lam0=cfg.lam0, convention=cfg.convention, exact_size=None, tebd=cfg.tebd)
    res = fig4(sub)
    res.name, res.config = "table1", dataclasses.asdict(cfg)
    res.plots = [Plot("table1", "bond dimension needed", "lam", "chi", [
        Curve("chi", res.tables["table1"].column("lam"), res.tables["table1"].column("chi"))], ylog=False)]
    return res


@dataclass(frozen=True)
class Fig5Config:
    gs: tuple = (1.0, 0.9, 0.8, 0.7)
    lam0s: tuple = (0, 1, 1, 2)
    lam_maxs: tuple = (5, 6, 6, 7)
    T: float = 8.0
    convention: str = "leading"
    exact_size: int | None = 3
    tebd: TebdSettings = TebdSettings(chi=50, chi_step=25, chi_max=180, tolerance_factor=0.01)


def fig5(cfg: Fig5Config = Fig5Config()) -> ExperimentResult:
    """Chain field-projector probabilities against the leading-order estimate.

    The probability of field ``lam`` is compared with ``chain_P(lam - 1)``:
    ``chain_P(k)`` is the weight that has climbed past truncation ``k``.
    """
    if not len(cfg.gs) == len(cfg.lam0s) == len(cfg.lam_maxs):
        raise ValueError("gs, lam0s and lam_maxs need equal lengths")
    res = ExperimentResult("fig5", dataclasses.asdict(cfg))
    size = cfg.tebd.size
    centre = _centre(size)
    table = Table("fig5", ["method", "g", "lam0", "lam", "measured", "t_max", "bound", "log10_bound",
                           "log10_slack"])
    ratio = Table("fig5_ratio", ["g", "lam0", "lam_max", "energy_bound", "chain_P", "log10_ratio",
                                 "chain_P_same_level", "log10_ratio_same_level"])
    conv_table = Table("fig5_convergence", ["g", "lam", "chi", "converged", "gap", "max_discarded", "runs"])
    for g, lam0, lam_max in zip(cfg.gs, cfg.lam0s, cfg.lam_maxs):
        levels = list(range(lam0 + 1, lam_max + 1))
        bounds = {k: chain_P(g, k - 1, lam0, cfg.T, cfg.convention) for k in levels}
        obs = {f"Pi_{k}": ("Pi", centre, k) for k in range(1, lam_max + 1)}

        def run(chi, g=g, lam_max=lam_max, obs=obs):
            return run_tebd("u1_chain", g, lam_max, cfg.T, size=size, chi=chi,
                            protocol=cfg.tebd.protocol(cfg.T), observables=obs)

        conv = _converged(run, cfg.tebd, cfg.T, [f"Pi_{k}" for k in levels],
                          {f"Pi_{k}": float(bounds[k]) for k in levels})
        res.series[f"fig5_g{g}"] = conv.series
        conv_table.add(g=g, **_convergence_row(lam_max, conv))
        measured = {"tebd" if size is not None else "itebd": conv.series}
        if cfg.exact_size:
            spec = ModelSpec("u1_chain", g, lam_max, size=cfg.exact_size)
            ex_obs = {f"Pi_{k}": observable("projector_Pi", spec.basis(), link=cfg.exact_size // 2, lam_prime=k)
                      for k in levels}
            measured["exact"] = expectation_series(spec.hamiltonian(), initial_state(spec), ex_obs, cfg.T,
                                                   cfg.tebd.dt)
        for method, ts in measured.items():
            for k in levels:
                col = ts[f"Pi_{k}"]
                i = int(np.argmax(col))
                b = bounds[k]
                table.add(method=method, g=g, lam0=lam0, lam=k, measured=float(col[i]), t_max=float(ts.times[i]),
                          bound=float(b), log10_bound=b.log10, log10_slack=b.log10 - _log10(float(col[i])))
        energy = tong_energy_bound(g, lam_max)
        same = chain_P(g, lam_max, lam0, cfg.T, cfg.convention)
        ratio.add(g=g, lam0=lam0, lam_max=lam_max, energy_bound=float(energy), chain_P=float(bounds[lam_max]),
                  log10_ratio=energy.log10 - bounds[lam_max].log10, chain_P_same_level=float(same),
                  log10_ratio_same_level=energy.log10 - same.log10)
    res.tables.update({"fig5": table, "fig5_ratio": ratio, "fig5_convergence": conv_table})
    res.tables.update(comparison_tables("fig5", ["method", "g", "lam"], table.rows, "measured", "bound"))
    plot = Plot("fig5", "plaquette chain: max <Pi_lam> vs estimate", "lam", "probability")
    for g in cfg.gs:
        rows = [r for r in table.rows if r["g"] == g and r["method"] != "exact"]
        plot.curves.append(Curve(f"g={g}", [r["lam"] for r in rows], [max(r["measured"], 1e-300) for r in rows]))
        plot.curves.append(Curve(f"estimate g={g}", [r["lam"] for r in rows], [r["bound"] for r in rows], True))
    res.plots.append(plot)
    return res


# ---------------------------------------------------------------------------
# Schwinger model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Fig67Config:
    g: float = 0.8
    m: float = 0.1
    T: float = 8.0
    lam_ref: int = 4
    lams: tuple = (1, 2, 3)
    onset: int = 1
    exact_sites: int | None = 12
    tebd: TebdSettings | None = TebdSettings(chi=50, chi_step=10, chi_max=110, stage_time=1.5, stage_chi=50)


def _schwinger_densities(g, m, lam, T, size, chi, protocol) -> TimeSeries:
    n = 2 if size is None else size
    links = range(n) if size is None else range(n - 1)
    obs = {f"E2_{x}": ("E2", x, None) for x in links}
    obs.update({f"chiral_{x}": ("chiral", x, None) for x in range(n)})
    ts = run_tebd("schwinger", g, lam, T, m=m, size=size, chi=chi, protocol=protocol, observables=obs)
    e2 = np.mean([ts[f"E2_{x}"] for x in links], axis=0)
    ch = np.mean([ts[f"chiral_{x}"] for x in range(n)], axis=0)
    return TimeSeries(ts.times, {"E2": e2, "chiral": ch, "discarded": ts["discarded"], "bond_dim": ts["bond_dim"]},
                      ts.metadata)


def fig6_7(cfg: Fig67Config = Fig67Config()) -> ExperimentResult:
    """Schwinger-model electric energy and chiral condensate errors with their bounds."""
    res = ExperimentResult("fig6_7", dataclasses.asdict(cfg))
    bounds = {lam: schwinger_error_bounds(cfg.g, cfg.m, lam, cfg.T, cfg.onset)
              for lam in range(cfg.onset, cfg.lam_ref + 1)}
    table = Table("fig6_7", ["method", "size", "observable", "lam", "form", "measured", "t_max", "bound",
                             "log10_bound", "log10_slack"])
    conv_table = Table("table2", ["lam", "chi", "converged", "gap", "max_discarded", "runs"],
                       metadata={"g": cfg.g, "m": cfg.m, "T": cfg.T})

    def add_rows(method, size, ref, runs):
        for lam in cfg.lams:
            for name, b in zip(("E2", "chiral"), bounds[lam]):
                err = np.abs(runs[lam][name] - ref[name])
                i = int(np.argmax(err))
                table.add(method=method, size=size, observable=name, lam=lam, form=b.params["form"],
                          measured=float(err[i]), t_max=float(ref.times[i]), bound=float(b), log10_bound=b.log10,
                          log10_slack=b.log10 - _log10(float(err[i])))

    if cfg.exact_sites:
        spec = ModelSpec("schwinger", cfg.g, cfg.lam_ref, m=cfg.m, size=cfg.exact_sites)
        runs = {}
        for lam in sorted(set(cfg.lams) | {cfg.lam_ref}):
            s = spec.with_lam(lam)
            basis = s.basis()
            obs = {"E2": observable("electric_energy_density", basis),
                   "chiral": observable("chiral_condensate_density", basis)}
            runs[lam] = expectation_series(s.hamiltonian(), initial_state(s), obs, cfg.T, 0.01)
            res.series[f"fig6_7_exact_lam{lam}"] = runs[lam]
        add_rows("exact", cfg.exact_sites, runs[cfg.lam_ref], runs)
    if cfg.tebd is not None:
        size = cfg.tebd.size
        runs = {}
        for lam in sorted(set(cfg.lams) | {cfg.lam_ref}):
            ref_lam = min(lam, cfg.lam_ref - 1)
            target = {"E2": float(bounds[ref_lam][0]), "chiral": float(bounds[ref_lam][1])}

            def run(chi, lam=lam):
                return _schwinger_densities(cfg.g, cfg.m, lam, cfg.T, size, chi, cfg.tebd.protocol(cfg.T))

            conv = _converged(run, cfg.tebd, cfg.T, ["E2", "chiral"], target)
            runs[lam] = conv.series
            res.series[f"fig6_7_tebd_lam{lam}"] = conv.series
            conv_table.add(**_convergence_row(lam, conv))
        add_rows("tebd" if size is not None else "itebd", size, runs[cfg.lam_ref], runs)
        res.tables["table2"] = conv_table
    res.tables["fig6_7"] = table
    res.tables.update(comparison_tables("fig6_7", ["method", "observable", "lam"], table.rows, "measured", "bound"))
    for name, title in (("E2", "electric energy density"), ("chiral", "chiral condensate")):
        plot = Plot(f"fig6_7_{name}", f"Schwinger g={cfg.g}, m={cfg.m}: {title} error", "lam", "max error")
        for method in dict.fromkeys(table.column("method")):
            rows = table.where(method=method, observable=name)
            plot.curves.append(Curve(method, [r["lam"] for r in rows], [max(r["measured"], 1e-300) for r in rows]))
        rows = table.where(method=table.rows[0]["method"], observable=name) if table.rows else []
        plot.curves.append(Curve("bound", [r["lam"] for r in rows], [r["bound"] for r in rows], True))
        res.plots.append(plot)
    return res


@dataclass(frozen=True)
class Table2Config:
    g: float = 0.8
    m: float = 0.1
    T: float = 8.0
    lams: tuple = (1, 2, 3, 4)
    onset: int = 1
    tebd: TebdSettings = TebdSettings(chi=50, chi_step=10, chi_max=110, stage_time=1.5, stage_chi=50)


def table2(cfg: Table2Config = Table2Config()) -> ExperimentResult:
    """Bond dimension at which consecutive Schwinger runs agree, per truncation."""
    lam_ref = max(cfg.lams)
    sub = Fig67Config(g=cfg.g, m=cfg.m, T=cfg.T, lam_ref=lam_ref, lams=tuple(k for k in cfg.lams if k < lam_ref),
                      onset=cfg.onset, exact_sites=None, tebd=cfg.tebd)
    res = fig6_7(sub)
    res.name, res.config = "table2", dataclasses.asdict(cfg)
    res.plots = [Plot("table2", "bond dimension needed", "lam", "chi", [
        Curve("chi", res.tables["table2"].column("lam"), res.tables["table2"].column("chi"))], ylog=False)]
    return res


# ---------------------------------------------------------------------------
# Hubbard-Holstein
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Fig8Config:
    g: float = 1.0
    omega: float = 1.0
    lam_b: int = 100
    lam_check: int | None = 120
    T: float = 10.0
    dt: float = 0.01
    probe: int = 50
    prior_epsilon: float = 0.2


def _left_boson_distribution(g, omega, lam_b, T, dt):
    spec = ModelSpec("hubbard_holstein", g, lam_b, omega=omega)
    b = lam_b + 1

    def reduce(p):
        return p.reshape(2, b, b).sum(axis=(0, 2))

    return probability_series(spec.hamiltonian(), initial_state(spec), T, dt, reduce=reduce)


def fig8(cfg: Fig8Config = Fig8Config()) -> ExperimentResult:
    """Left-site boson occupation probabilities for two-site Hubbard-Holstein."""
    res = ExperimentResult("fig8", dataclasses.asdict(cfg))
    times, probs = _left_boson_distribution(cfg.g, cfg.omega, cfg.lam_b, cfg.T, cfg.dt)
    levels = range(cfg.lam_b + 1)
    res.series["fig8_occupation"] = TimeSeries(times, {f"P_{n}": probs[:, n] for n in levels},
                                               {"g": cfg.g, "omega": cfg.omega, "lam_b": cfg.lam_b})
    peak = probs.max(axis=0)
    diff = None
    if cfg.lam_check:
        _, check = _left_boson_distribution(cfg.g, cfg.omega, cfg.lam_check, cfg.T, cfg.dt)
        diff = float(np.max(np.abs(check[:, : cfg.lam_b + 1] - probs)))
    table = Table("fig8", ["n", "max_probability", "log10_max_probability"])
    for n in levels:
        table.add(n=n, max_probability=float(peak[n]), log10_max_probability=_log10(float(peak[n])))
    res.tables["fig8"] = table
    probe = float(peak[cfg.probe])
    res.summary = {"truncation_difference": diff, "probe_level": cfg.probe, "probe_max_probability": probe,
                   "log10_margin": math.log10(cfg.prior_epsilon) - _log10(probe)}
    res.plots.append(Plot("fig8", "Hubbard-Holstein: max P(n) on the left site", "n", "probability", [
        Curve("max probability", list(levels), [max(float(p), 1e-300) for p in peak]),
        Curve("prior epsilon", [0, cfg.lam_b], [cfg.prior_epsilon] * 2, True)]))
    return res


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

PRESETS: dict[str, tuple[type, Callable]] = {
    "fig1": (Fig1Config, fig1),
    "fig2": (Fig2Config, fig2),
    "fig3": (Fig3Config, fig3),
    "fig4": (Fig4Config, fig4),
    "fig5": (Fig5Config, fig5),
    "fig6_7": (Fig67Config, fig6_7),
    "fig8": (Fig8Config, fig8),
    "table1": (Table1Config, table1),
    "table2": (Table2Config, table2),
    "eigenscan": (EigenscanConfig, eigenscan),
}


def run_preset(name: str, config=None) -> ExperimentResult:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    cls, fn = PRESETS[name]
    return fn(config if config is not None else cls())
