"""Command line for the laboratory.

Four commands: cascade (infrared cutoff cascade -> cascade.csv, ledger.json),
dispersion (energy/gradient/convexity/Hoelder tables), scatter (kernel bound
sweeps, phase values, indicator scalings, overlap tables) and validate (the
numbered acceptance criteria).

Exit-code policy: failing ledger entries are scientific findings and leave
the exit code at 0; only `validate` turns failures into a nonzero exit.
Config errors (unparseable JSON, unknown keys, out-of-range values) always
exit nonzero with a message anchored to the offending line where possible.
"""

from __future__ import annotations

import os
import re
from pathlib import Path

import click
import numpy as np

from . import validate as val
from .cascade import run_cascade
from .dispersion import (
    check_B1,
    check_velocity_bound,
    hoelder_gradient,
    hoelder_state,
    scan_dispersion,
)
from .errors import NelsonLabError
from .fock import build_grid, enumerate_basis
from .report import write_csv_atomic, write_json_atomic
from .scatter import (
    CutoffSchedule,
    chi_axis_l1,
    chi_l1_scaling,
    coherent_overlap_decay,
    gamma_phase,
    phi_interior_bound,
    phi_intermediate_decay,
    phi_kernel,
    validate_schedule,
    _chi_geometry,
)

# keep thread-limit controllers alive for the process lifetime
_limit_holders = []


def _apply_threads(n):
    if n is None:
        env = os.environ.get("NELSON_THREADS", "").strip()
        if env:
            try:
                n = int(env)
            except ValueError:
                raise click.ClickException(
                    f"NELSON_THREADS={env!r} is not an integer")
    if n is None:
        return
    if n < 1:
        raise click.ClickException("thread count must be >= 1")
    from threadpoolctl import threadpool_limits

    _limit_holders.append(threadpool_limits(limits=n))


def _anchored(path: str, text: str, msg) -> str:
    """Prefix a config complaint with path:line when a named key can be
    located in the file; dotted-path segments are tried most-specific
    first."""
    msg = str(msg)
    tokens = []
    dotted = re.match(r"config((?:\.[A-Za-z0-9_]+)+):", msg)
    if dotted:
        tokens.extend(reversed(dotted.group(1).lstrip(".").split(".")))
    tokens.extend(re.findall(r"[A-Za-z_][A-Za-z0-9_]*", msg))
    for token in tokens:
        hit = re.search(rf'"{token}"\s*:', text)
        if hit:
            line = text[: hit.start()].count("\n") + 1
            return f"{path}:{line}: {msg}"
    return f"{path}: {msg}"


def _load_json(path: str):
    import json

    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise click.ClickException(f"{path}: {exc.strerror or exc}")
    try:
        return text, json.loads(text)
    except json.JSONDecodeError as exc:
        raise click.ClickException(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}")


def _build(loader, path: str, strict: bool):
    text, doc = _load_json(path)
    try:
        return loader(doc, strict)
    except (NelsonLabError, TypeError, ValueError) as exc:
        raise click.ClickException(_anchored(path, text, exc))


def _ledger_doc(entries, meta=None) -> dict:
    return {"entries": [e.as_dict() for e in entries], "meta": meta or {}}


def _config_option(default_name):
    def deco(fn):
        fn = click.option(
            "--config", "config_path", metavar="PATH", default=None,
            help=f"JSON config (default: shipped {default_name}).")(fn)
        fn = click.option(
            "--out", "out_dir", metavar="DIR", default=".",
            type=click.Path(file_okay=False),
            help="Output directory (created if missing).")(fn)
        fn = click.option(
            "--threads", type=int, default=None,
            help="Cap BLAS threads (env NELSON_THREADS as fallback).")(fn)
        fn = click.option(
            "--strict", is_flag=True,
            help="Raise instead of warn outside the strict analysis regime.")(fn)
        return fn

    return deco


@click.group()
def main():
    """Desk-scale numerical laboratory for the massless Nelson model."""


# ---------------------------------------------------------------------------
# cascade


@main.command("cascade")
@_config_option("cascade.json")
def cmd_cascade(config_path, out_dir, threads, strict):
    """Run the infrared cutoff cascade and write cascade.csv + ledger.json."""
    _apply_threads(threads)
    path = config_path or str(val.shipped_config_path("cascade.json"))
    cfg = _build(val.cascade_config_from_dict, path, strict)
    report = run_cascade(cfg)

    by_name = {e.name: e for e in report.ledger}
    nan = float("nan")
    header = ["j", "sigma", "energy", "gap", "grad_norm", "d_raw",
              "d_dressed", "vacuum_overlap", "margin_energy_lower",
              "margin_energy_upper", "margin_gap_half"]
    rows = []
    for j, rec in enumerate(report.records):
        last = j >= cfg.J
        rows.append([
            j, rec.sigma, rec.energy, rec.gap,
            float(np.linalg.norm(rec.grad_e)),
            nan if last else float(report.d_raw[j]),
            nan if last else float(report.d_dressed[j]),
            rec.vacuum_overlap,
            nan if last else by_name[f"energy_step_lower[{j}]"].margin,
            nan if last else by_name[f"energy_step_upper[{j}]"].margin,
            by_name[f"gap_half_next_cutoff[{j}]"].margin,
        ])

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv_atomic(str(out / "cascade.csv"), header, rows)
    meta = dict(report.meta)
    meta["fits"] = report.fits
    meta["sigmas"] = [float(s) for s in cfg.sigmas]
    write_json_atomic(str(out / "ledger.json"), _ledger_doc(report.ledger, meta))
    n_fail = sum(1 for e in report.ledger if not e.passed)
    click.echo(f"cascade: {len(rows)} steps, "
               f"{len(report.ledger) - n_fail}/{len(report.ledger)} ledger "
               f"entries passed -> {out / 'cascade.csv'}")


# ---------------------------------------------------------------------------
# dispersion


@main.command("dispersion")
@_config_option("dispersion.json")
def cmd_dispersion(config_path, out_dir, threads, strict):
    """Tabulate E(P), grad E, convexity floors and Hoelder exponents."""
    _apply_threads(threads)
    path = config_path or str(val.shipped_config_path("dispersion.json"))
    lab, scan_cfg = _build(val.dispersion_lab_from_dict, path, strict)
    for key in ("P_values", "ray", "hoelder"):
        if key not in scan_cfg:
            raise click.ClickException(
                f"{path}: config.scan.{key}: required by the dispersion command")

    direction = np.asarray(scan_cfg["ray"]["direction"], dtype=float)
    radii = np.asarray(scan_cfg["ray"]["radii"], dtype=float)
    ray = radii[:, None] * (direction / np.linalg.norm(direction))[None, :]
    pts = np.vstack([ray, np.asarray(scan_cfg["P_values"], dtype=float)])

    scan = scan_dispersion(lab, pts)
    ray_scan = scan_dispersion(lab, ray)
    bound = check_velocity_bound(scan, lab.params)
    b1 = check_B1(ray_scan)

    hcfg = scan_cfg["hoelder"]
    p0 = np.asarray(hcfg["P"], dtype=float)
    deltas = hcfg["delta_max"] / 2.0 ** np.arange(hcfg["n_halvings"] + 1)
    grad_fit = hoelder_gradient(lab, p0, deltas, hcfg["sigma"],
                                direction=direction)
    state_fit = hoelder_state(lab, p0, deltas, hcfg["sigma"],
                              direction=direction)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv_atomic(
        str(out / "dispersion.csv"),
        ["p_norm", "px", "py", "pz", "sigma", "energy", "gx", "gy", "gz",
         "grad_norm", "gap", "ok"],
        scan.rows())
    write_csv_atomic(
        str(out / "b1.csv"),
        ["sigma", "p", "dE", "d2E", "det_dJ"],
        b1["rows"])
    write_csv_atomic(
        str(out / "hoelder.csv"),
        ["delta", "grad_increment", "state_increment"],
        list(zip(deltas, grad_fit["increments"], state_fit["increments"])))
    ledger = (bound["ledger"] + b1["ledger"] + grad_fit["ledger"]
              + state_fit["ledger"])
    meta = {
        "max_speed": bound["max_speed"],
        "chain_margin": bound["chain_margin"],
        "m_r": b1["m_r"],
        "hoelder_gradient_exponent": grad_fit["exponent"],
        "hoelder_state_exponent": state_fit["exponent"],
        "sigmas": [float(s) for s in lab.sigmas],
    }
    write_json_atomic(str(out / "ledger.json"), _ledger_doc(ledger, meta))
    n_fail = sum(1 for e in ledger if not e.passed)
    click.echo(f"dispersion: {len(pts)} momenta x {len(lab.sigmas)} cutoffs, "
               f"{len(ledger) - n_fail}/{len(ledger)} ledger entries passed "
               f"-> {out / 'dispersion.csv'}")


# ---------------------------------------------------------------------------
# scatter


@main.command("scatter")
@_config_option("scatter.json")
def cmd_scatter(config_path, out_dir, threads, strict):
    """Kernel bound sweeps, phase values, indicator scalings, overlaps."""
    _apply_threads(threads)
    path = config_path or str(val.shipped_config_path("scatter.json"))
    doc = _build(val.scatter_sections_from_dict, path, strict)
    text, _ = _load_json(path)
    try:
        schedule = CutoffSchedule(**doc.get("schedule", {}))
        if "eps_part" in doc:
            validate_schedule(schedule, doc["eps_part"])
    except (NelsonLabError, TypeError) as exc:
        raise click.ClickException(_anchored(path, text, exc))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ledger = []
    meta = {}
    written = []

    if "phi" in doc:
        p = doc["phi"]
        v = np.asarray(p["v"], dtype=float)
        t_values = np.asarray(p["t_values"], dtype=float)
        decay = phi_intermediate_decay(
            v, t_values, p["kappa1"], eta=p.get("eta", 0.1),
            eta_prime=p.get("eta_prime", 0.2), g=p.get("g", 1.0))
        rows = []
        for t, env in zip(t_values, decay["envelope"]):
            sigma_t = schedule.sigma_slow(t)
            origin, _ = phi_kernel(np.zeros(3), t, v, sigma_t, p["kappa1"],
                                   g=p.get("g", 1.0))
            rows.append([t, sigma_t, origin,
                         phi_interior_bound(v, p.get("eta", 0.1), t,
                                            g=p.get("g", 1.0)),
                         env])
        write_csv_atomic(
            str(out / "phi.csv"),
            ["t", "sigma_t", "phi_origin", "interior_bound",
             "intermediate_envelope"],
            rows)
        ledger.extend(decay["ledger"])
        meta["phi_envelope_exponent"] = decay["exponent"]
        written.append("phi.csv")

    if "gamma" in doc:
        gcfg = doc["gamma"]
        rows = [[t, gamma_phase(np.asarray(gcfg["v"], dtype=float),
                                np.asarray(gcfg["grad_e"], dtype=float),
                                float(t), schedule,
                                sigma_t=gcfg.get("sigma_t"),
                                g=gcfg.get("g", 1.0))]
                for t in gcfg["t_values"]]
        write_csv_atomic(str(out / "gamma.csv"), ["t", "gamma"], rows)
        written.append("gamma.csv")

    if "chi" in doc:
        ccfg = doc["chi"]
        res = chi_l1_scaling(ccfg["delta"], ccfg["s_values"])
        rows = []
        for s, l1_3d in zip(res["s_values"], res["l1_3d"]):
            a, r = _chi_geometry(float(s), ccfg["delta"])
            rows.append([s, a, r, chi_axis_l1(float(s), ccfg["delta"]), l1_3d])
        write_csv_atomic(
            str(out / "chi.csv"),
            ["s", "half_width", "ramp", "axis_l1", "l1_3d"],
            rows)
        ledger.extend(res["ledger"])
        meta["chi_l1_exponent"] = res["exponent"]
        meta["chi_halving_ratio"] = res["halving_ratio"]
        written.append("chi.csv")

    if "overlap" in doc:
        ocfg = doc["overlap"]
        window = tuple(ocfg["window"])
        grid = build_grid(window[0], window[1], ocfg.get("n_radial", 1),
                          angular=ocfg.get("angular", "octahedral6"))
        rows = []
        for n_max in ocfg["n_max_values"]:
            basis = enumerate_basis(grid.n_modes, int(n_max))
            res = coherent_overlap_decay(
                ocfg["params"], grid, basis,
                np.asarray(ocfg["v_i"], dtype=float),
                np.asarray(ocfg["v_j"], dtype=float), window=window)
            rows.append([int(n_max), abs(res["overlap"]), res["predicted"],
                         res["error"], res["C_discrete"]])
        write_csv_atomic(
            str(out / "overlap.csv"),
            ["n_max", "overlap_abs", "predicted", "error", "C_discrete"],
            rows)
        written.append("overlap.csv")

    write_json_atomic(str(out / "ledger.json"), _ledger_doc(ledger, meta))
    n_fail = sum(1 for e in ledger if not e.passed)
    click.echo(f"scatter: wrote {', '.join(written)}; "
               f"{len(ledger) - n_fail}/{len(ledger)} ledger entries passed "
               f"-> {out}")


# ---------------------------------------------------------------------------
# validate


@main.command("validate")
@click.option("--list", "list_only", is_flag=True,
              help="Print the numbered criteria without running them.")
@click.option("--threads", type=int, default=None,
              help="Cap BLAS threads (env NELSON_THREADS as fallback).")
@click.pass_context
def cmd_validate(ctx, list_only, threads):
    """Run the acceptance criteria against the shipped configurations.

    Exits nonzero when any criterion fails.
    """
    if list_only:
        for cid, name in val.list_criteria():
            click.echo(f"{cid:2d}  {name}")
        return
    _apply_threads(threads)

    def show(r):
        click.echo(f"[{r.cid:2d}] {'PASS' if r.passed else 'FAIL'} "
                   f"{r.name}: {r.detail}")

    results = val.run_all(progress=show)
    n_pass = sum(1 for r in results if r.passed)
    click.echo(f"{n_pass}/{len(results)} criteria passed")
    if n_pass != len(results):
        ctx.exit(1)


if __name__ == "__main__":
    main()
