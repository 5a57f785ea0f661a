"""Scenario execution shared by the command line and the scripts."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .bloch import QubitScenario, bloch_from_state, closed_form_cft, scenario_ensemble, two_pairs_branch
from .config import QUBIT_KINDS, SWEEPABLE, RunConfig, build_custom_ensemble
from .exceptions import ConfigError
from .solvers import certify, deterministic_cft_qubit, probabilistic_cft, werner_cft, werner_channel

SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "schema_version",
    "scenario",
    "param",
    "value",
    "det_cft",
    "prob_cft",
    "det_closed_form",
    "prob_closed_form",
    "det_delta",
    "prob_delta",
    "branch",
)


def qubit_scenario(cfg: RunConfig):
    p = dict(cfg.scenario.params)
    priors = p.pop("priors", None)
    try:
        return QubitScenario(cfg.scenario.kind, priors=None if priors is None else tuple(priors), **p)
    except ValueError as exc:
        raise ConfigError(f"[scenario]: {exc}") from None


def _det_block(ens, so):
    res = deterministic_cft_qubit(ens, grid=so.grid, refine=so.refine)
    dec = res.witness
    return res.value, {
        **res.report,
        "weights": dec.weights,
        "bloch_vectors": [bloch_from_state(s) for s in dec.states],
    }


def _prob_block(source, so):
    res = probabilistic_cft(source, restarts=so.restarts, seed=so.seed)
    psi, phi = res.witness
    rep = {k: v for k, v in res.report.items() if k != "iterations"}
    rep["iterations_total"] = int(sum(res.report["iterations"]))
    rep["witness_output"] = [[z.real, z.imag] for z in psi]
    rep["witness_input"] = [[z.real, z.imag] for z in phi]
    return res.value, rep


def evaluate(cfg: RunConfig):
    """Thresholds, closed-form references and diagnostics for one configuration."""
    kind = cfg.scenario.kind
    so = cfg.solver
    out = {"scenario": kind, "det_cft": None, "prob_cft": None, "closed_form": None, "deltas": None, "reports": {}}
    if kind in QUBIT_KINDS:
        s = qubit_scenario(cfg)
        ens = scenario_ensemble(s)
        out["det_cft"], out["reports"]["det"] = _det_block(ens, so)
        out["prob_cft"], out["reports"]["prob"] = _prob_block(ens, so)
        if s.priors is None:
            cf = closed_form_cft(s)
            out["closed_form"] = {"det": cf.det_value, "prob": cf.prob, "branch": cf.branch}
            if kind == "two_pairs":
                out["closed_form"]["branch"] = two_pairs_branch(s.alpha, s.beta)
    elif kind == "werner":
        d = cfg.scenario.params["d"]
        if d < 2:
            raise ConfigError("[scenario].d must be at least 2")
        ch = werner_channel(d)
        out["prob_cft"], out["reports"]["prob"] = _prob_block(ch, so)
        if d == 2:
            from .ensembles import uniform_ensemble

            out["det_cft"], out["reports"]["det"] = _det_block(uniform_ensemble(2), so)
        out["closed_form"] = {"det": None, "prob": werner_cft(d), "branch": ""}
    elif kind == "coherent":
        from .fock import GaussianEnsembleSpec, coherent_cft, truncation_report

        try:
            spec = GaussianEnsembleSpec(cfg.scenario.params["eta"], cfg.scenario.params["g"])
        except ValueError as exc:
            raise ConfigError(f"[scenario]: {exc}") from None
        rep = truncation_report(spec, so.truncation, so.radial, so.angular)
        out["prob_cft"] = rep.norm
        out["reports"]["truncation"] = rep.to_dict()
        out["closed_form"] = {"det": None, "prob": coherent_cft(spec), "branch": ""}
    else:
        ens = build_custom_ensemble(cfg.scenario.custom)
        if ens.dim == 2:
            out["det_cft"], out["reports"]["det"] = _det_block(ens, so)
        out["prob_cft"], out["reports"]["prob"] = _prob_block(ens, so)
    cf = out["closed_form"]
    if cf is not None:
        out["deltas"] = {
            "det": None if cf["det"] is None or out["det_cft"] is None else abs(out["det_cft"] - cf["det"]),
            "prob": abs(out["prob_cft"] - cf["prob"]),
        }
    return out


def sweep_values(start, stop, steps, integer=False):
    if steps < 1:
        raise ConfigError("sweep needs at least one step")
    vals = np.linspace(start, stop, steps) if steps > 1 else np.array([start])
    if integer:
        vals = np.unique(np.round(vals).astype(int))
    return [v.item() for v in vals]


def _sweep_point(args):
    cfg, name, value = args
    res = evaluate(cfg.with_param(name, value))
    cf = res["closed_form"] or {}
    deltas = res["deltas"] or {}
    return {
        "schema_version": SCHEMA_VERSION,
        "scenario": res["scenario"],
        "param": name,
        "value": value,
        "det_cft": res["det_cft"],
        "prob_cft": res["prob_cft"],
        "det_closed_form": cf.get("det"),
        "prob_closed_form": cf.get("prob"),
        "det_delta": deltas.get("det"),
        "prob_delta": deltas.get("prob"),
        "branch": cf.get("branch", ""),
    }


def sweep(cfg: RunConfig, name, start, stop, steps):
    """One row per parameter value, in parameter order, evaluated on a worker pool."""
    kind = cfg.scenario.kind
    if name not in SWEEPABLE[kind]:
        allowed = ", ".join(SWEEPABLE[kind]) or "none"
        raise ConfigError(f"parameter {name!r} cannot be swept for {kind}; sweepable: {allowed}")
    values = sweep_values(start, stop, steps, integer=name == "d")
    jobs = [(cfg, name, v) for v in values]
    workers = cfg.solver.workers or os.cpu_count() or 1
    if workers == 1 or len(jobs) == 1:
        return [_sweep_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(_sweep_point, jobs))


def rows_to_csv(rows):
    import csv
    import io

    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _csv_cell(r[k]) for k in CSV_COLUMNS})
    return buf.getvalue()


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ""
    return v


def certify_config(cfg: RunConfig, measured):
    res = evaluate(cfg)
    det = res["det_cft"]
    if det is None and cfg.scenario.kind in ("werner", "coherent"):
        # for these ensembles the two thresholds coincide analytically
        det = res["prob_cft"]
    verdict = certify(measured, None if det is None else min(det, res["prob_cft"]), res["prob_cft"])
    return res, verdict
