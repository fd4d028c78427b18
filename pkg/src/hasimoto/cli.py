"""Command line front end: ``hasimoto verify | evolve | compare | hamiltonians``.

Exit codes: 0 ok, 1 identity or tolerance failure, 2 configuration or
input error, 3 blow-up, 4 coordinate singularity.
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import geometry as geo
from . import hierarchy, io, mapping, transform, verify
from .algebra import CPN
from .calculus import Grid, quadrature
from .config import RunConfig, load_config
from .errors import BlowUpError, ConfigError, HasimotoError, SingularityError

log = logging.getLogger("hasimoto")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BLOWUP, EXIT_SINGULAR = 0, 1, 2, 3, 4


def _exit_code(err: Exception) -> int:
    if isinstance(err, ConfigError):
        return EXIT_CONFIG
    if isinstance(err, BlowUpError):
        return EXIT_BLOWUP
    if isinstance(err, SingularityError):
        return EXIT_SINGULAR
    return EXIT_FAIL


def _load(args) -> RunConfig:
    text = ""
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as err:
            raise ConfigError(f"cannot read config file: {err}") from None
    over = {}
    if args.seed is not None:
        if args.seed < 0 or args.seed >= 2 ** 64:
            raise ConfigError("--seed must be an unsigned 64-bit integer", key="seed")
        over["seed"] = int(args.seed)
        over["initial.seed"] = int(args.seed)
    if args.out:
        over["output_dir"] = args.out
    return load_config(text, over)


def _outdir(cfg: RunConfig) -> Path:
    p = Path(cfg["output_dir"])
    p.mkdir(parents=True, exist_ok=True)
    return p


# ----------------------------------------------------------------------
# verify

def _suite_for(args):
    n, samples, seed, corrupt = args
    corruption = verify.Corruption(*corrupt) if corrupt else None
    return verify.run_suite((n,), samples, seed, corruption)[0]


def cmd_verify(cfg: RunConfig, jobs: int = 1) -> int:
    corrupt = cfg["verify.corrupt"] or None
    tasks = [(n, cfg["verify.samples"], cfg["seed"], corrupt) for n in cfg["verify.ns"]]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            reports = list(ex.map(_suite_for, tasks))
    else:
        reports = [_suite_for(t) for t in tasks]
    for rep in reports:
        print(f"[N={rep.n}] {len(rep.checks)} identities")
        for c in rep.checks:
            flag = "ok" if c.passed else "FAIL"
            print(f"  {c.name:<26s} {c.residual:10.3e}  tol {c.tolerance:.0e}  {flag}")
    passed = all(r.passed for r in reports)
    out = _outdir(cfg)
    doc = {"command": "verify", "passed": passed, "sections": [r.as_dict() for r in reports]}
    if corrupt:
        doc["corruption"] = list(corrupt)
    io.write_report(out / "report.json", doc)
    tols = {"algebra": verify.ALGEBRA_TOL, "calculus": verify.CALCULUS_TOL, **verify.RECURSION_TOLS}
    io.write_manifest(out / "manifest.txt", cfg.echo(), tols, {"command": "verify"})
    if not passed:
        for r in reports:
            if r.failures():
                print(f"identity failure for N={r.n}: {', '.join(r.failures())}")
        return EXIT_FAIL
    return EXIT_OK


# ----------------------------------------------------------------------
# initial data

def _initial(cfg: RunConfig, al: CPN, grid: Grid):
    """Initial state for the configured flow family."""
    kind, fam = cfg["initial.kind"], cfg.flow_family
    seed = cfg["initial.seed"]
    if kind == "from_file":
        values, fgrid, meta = io.read_snapshot(cfg["initial.path"])
        if fgrid != grid:
            raise ConfigError("snapshot grid differs from grid.points/grid.length", key="initial.path")
        if int(meta["n"]) != al.n:
            raise ConfigError("snapshot N differs from algebra.n", key="initial.path")
        want = {"q": "q", "spin": "spin", "curve": "curve",
                "map": "coords" if cfg["flow"] == "coord_map" else "map"}[fam]
        if meta["kind"] != want:
            raise ConfigError(f"flow {cfg['flow']} needs a {want} snapshot, got {meta['kind']}",
                              key="initial.path")
        t0 = float(meta.get("time", 0.0))
        if want == "q":
            return hierarchy.HasimotoState(values, grid, al, t0)
        if want == "spin":
            return geo.SpinState(values, grid, al, t0)
        if want == "curve":
            slope = np.asarray(meta.get("meta", {}).get("slope", np.zeros((al.size, al.size)).tolist()))
            if slope.ndim == 3:
                slope = slope[..., 0] + 1j * slope[..., 1]
            return geo.CurveState(values, grid, al, slope=slope.astype(complex), time=t0)
        if want == "coords":
            return mapping.MapCoords(values[0], values[1], grid, t0)
        return mapping.MapState(values, grid, al, t0)
    if fam == "q":
        if kind == "plane_wave":
            return hierarchy.plane_wave(al, grid, cfg["initial.a"], cfg["initial.k"], cfg["initial.direction"])
        if kind == "zero":
            return hierarchy.HasimotoState(np.zeros((grid.m_points, al.n), complex), grid, al)
        if kind == "map_coords":
            ec = transform.EquivalenceConfig(n=al.n, m_points=grid.m_points, length=grid.length,
                                             theta0=cfg["initial.theta0"], amplitude=cfg["initial.amplitude"],
                                             phase_seed=seed)
            return transform.hasimoto_from_map(transform.reference_coords(ec, grid), al)
        q = verify.random_band_q(al, grid, seed, cfg["initial.kmax"], cfg["initial.amplitude"])
        return hierarchy.HasimotoState(q, grid, al)
    if kind == "zero":
        raise ConfigError("zero initial data is only defined for q-flows", key="initial.kind")
    coords = None
    if kind == "map_coords" or cfg["flow"] == "coord_map":
        coords = mapping.random_coords(al.n, grid, seed, max(cfg["initial.kmax"], 1),
                                       cfg["initial.amplitude"], cfg["initial.theta0"])
        if cfg["flow"] == "coord_map":
            return coords
        spin = geo.SpinState(mapping.embed(coords, al).gamma_map / al.kappa, grid, al)
    else:
        spin = geo.random_spin(al, grid, seed, max(cfg["initial.kmax"], 1), cfg["initial.amplitude"])
    if fam == "spin":
        return spin
    if fam == "curve":
        return transform.curve_from_spin(spin)
    return mapping.MapState(al.kappa * spin.t_field, grid, al)


# ----------------------------------------------------------------------
# diagnostics per family

def _q_diag(cfg, al):
    header = ["t", "H1", "H2", "H3", "H4", "lax_residual_0", "lax_residual_1", "mass_mean_q"]
    idx = cfg.hierarchy_index
    dt = cfg["dt"]

    def row(st):
        hs = [hierarchy.hamiltonian(k, st) for k in (1, 2, 3, 4)]
        lax = [float("nan"), float("nan")]
        if idx == 2 and cfg["t_final"] > 0:
            nxt = hierarchy.evolve(st, "nls", dt=dt, t_final=st.time + dt, integrator="ifrk4",
                                   dealias=cfg["dealias"])
            lax = [hierarchy.lax_residual(st, nxt, lam) for lam in (0.0, 1.0)]
        mass = float(np.max(np.abs(np.mean(st.q, axis=0))))
        return [st.time] + hs + lax + [mass]

    return header, row


def _spin_diag(al, tangent):
    header = ["t", "H1", "H2", "H3", "H4", "min_norm", "max_norm", "spectrum_drift", "unit_drift"]

    def row(obj):
        spin = geo.SpinState(tangent(obj), obj.grid, al, obj.time)
        hs = [geo.spin_hamiltonian(k, spin) for k in (1, 2, 3, 4)]
        nrm = np.sqrt(np.maximum(geo.sqnorm(al, spin.t_field), 0.0))
        spec = geo.spectrum_deviation(al, spin.t_field, 1.0 / al.kappa)
        return [obj.time] + hs + [float(nrm.min()), float(nrm.max()), spec, float(np.max(np.abs(nrm - 1)))]

    return header, row


def _map_diag(al):
    header = ["t", "H1", "H2", "arclength", "max_local_stretch", "spectrum_drift"]

    def row(ms):
        rhs = mapping.schrodinger_map_rhs_matrix(ms)
        stretch = float(np.max(np.abs(mapping.local_stretch(ms, rhs))))
        return [ms.time, mapping.map_hamiltonian(1, ms), mapping.map_hamiltonian(2, ms),
                mapping.total_arclength(ms), stretch, mapping.map_spectrum_deviation(ms)]

    return header, row


def _coord_diag(al):
    header = ["t", "theta_min", "theta_max", "norm_defect", "arclength"]

    def row(c):
        ms = mapping.embed(c, al, tol=1e-6)
        return [c.time, float(c.theta.min()), float(c.theta.max()), c.norm_defect(),
                mapping.total_arclength(ms)]

    return header, row


def _snapshot(out: Path, idx: int, obj, fam, al, flow):
    base = out / "snapshots" / f"snap_{idx:05d}"
    if flow == "coord_map":
        return io.write_snapshot(base, (obj.theta, obj.big_theta), obj.grid, obj.time, "coords", al.n)
    if fam == "q":
        return io.write_snapshot(base, obj.q, obj.grid, obj.time, "q", al.n)
    if fam == "spin":
        return io.write_snapshot(base, obj.t_field, obj.grid, obj.time, "spin", al.n)
    if fam == "curve":
        slope = np.stack([obj.slope.real, obj.slope.imag], axis=-1).tolist()
        return io.write_snapshot(base, obj.gamma, obj.grid, obj.time, "curve", al.n, meta={"slope": slope})
    return io.write_snapshot(base, obj.gamma_map, obj.grid, obj.time, "map", al.n)


def cmd_evolve(cfg: RunConfig) -> int:
    al = CPN(cfg["algebra.n"])
    grid = Grid(cfg["grid.points"], cfg["grid.length"])
    out = _outdir(cfg)
    fam, flow = cfg.flow_family, cfg["flow"]
    state = _initial(cfg, al, grid)
    if flow == "coord_map":
        header, row = _coord_diag(al)
    elif fam == "q":
        header, row = _q_diag(cfg, al)
    elif fam == "spin":
        header, row = _spin_diag(al, lambda s: s.t_field)
    elif fam == "curve":
        header, row = _spin_diag(al, lambda c: c.d(1))
    else:
        header, row = _map_diag(al)

    rows = []
    nsnap = [0]
    every_snap = cfg["snapshot_every"]
    every_diag = cfg["diagnostics_every"]
    counter = [0]

    def callback(obj):
        k = counter[0]
        counter[0] += 1
        rows.append(row(obj))
        if every_snap and k % max(every_snap // every_diag, 1) == 0 and k > 0:
            _snapshot(out, nsnap[0], obj, fam, al, flow)
            nsnap[0] += 1

    _snapshot(out, nsnap[0], state, fam, al, flow)
    nsnap[0] += 1
    tf, dt, dal = cfg["t_final"], cfg["dt"], cfg["dealias"]
    final = state
    try:
        if tf <= 0:
            rows.append(row(state))
        elif fam == "q":
            idx = cfg.hierarchy_index
            name = {2: "nls", 3: "mkdv"}.get(idx, idx) if flow in ("nls", "mkdv") else idx
            if cfg["integrator"] == "ifrk4" and name not in ("nls", "mkdv"):
                log.info("ifrk4 is only available for nls/mkdv; using rk4 for %s", flow)
            final = hierarchy.evolve(state, name, dt=dt, t_final=tf, integrator=cfg["integrator"],
                                     dealias=dal, callback=callback, every=every_diag)
        elif flow == "coord_map":
            final = mapping.evolve_coords(state, dt=dt, t_final=tf, theta_margin=cfg["theta_margin"],
                                          callback=callback, every=every_diag)
        elif fam == "spin":
            final = geo.evolve_spin(state, flow, dt=dt, t_final=tf, dealias=dal,
                                    callback=callback, every=every_diag)
        elif fam == "curve":
            final = geo.evolve_curve(state, flow, dt=dt, t_final=tf, dealias=dal,
                                     callback=callback, every=every_diag)
        else:
            final = mapping.evolve_map(state, flow, dt=dt, t_final=tf, dealias=dal,
                                       callback=callback, every=every_diag)
    except HasimotoError as err:
        io.write_table(out / "diagnostics.csv", header, rows)
        print(f"error: {err}", file=sys.stderr)
        return _exit_code(err)
    if tf > 0:
        _snapshot(out, nsnap[0], final, fam, al, flow)
    io.write_table(out / "diagnostics.csv", header, rows)

    summary = {"command": "evolve", "flow": flow, "t_final": final.time, "drift": {}, "max": {}}
    first, last = rows[0], rows[-1]
    for j, name in enumerate(header[1:], start=1):
        if name.startswith("H") or name in ("arclength",):
            a, b = first[j], last[j]
            summary["drift"][name] = float(abs(b - a) / abs(a)) if abs(a) > 1e-12 else float(abs(b - a))
        else:
            col = np.array([r[j] for r in rows], dtype=float)
            summary["max"][name] = float(np.nanmax(np.abs(col))) if np.any(np.isfinite(col)) else float("nan")
    print(f"{flow}: t = {final.time:.6g}")
    for name, v in summary["drift"].items():
        print(f"  drift {name:<18s} {v:.3e}")
    for name, v in summary["max"].items():
        print(f"  max   {name:<18s} {v:.3e}")
    if fam == "q" and cfg["initial.kind"] == "plane_wave" and cfg.hierarchy_index == 2:
        exact = hierarchy.plane_wave(al, grid, cfg["initial.a"], cfg["initial.k"],
                                     cfg["initial.direction"], final.time)
        err = float(np.max(np.abs(final.q - exact.q)))
        summary["plane_wave_error"] = err
        print(f"  plane-wave max error  {err:.3e}")
    io.write_report(out / "report.json", summary)
    io.write_manifest(out / "manifest.txt", cfg.echo(), {"tolerance": cfg["tolerance"]}, {"command": "evolve"})
    return EXIT_OK


# ----------------------------------------------------------------------
# compare

def _equivalence_config(cfg: RunConfig, n: int) -> transform.EquivalenceConfig:
    flow = cfg["flow"]
    if flow not in ("nls", "mkdv"):
        raise ConfigError("compare runs the nls or mkdv flow", key="flow")
    return transform.EquivalenceConfig(
        n=n, m_points=cfg["grid.points"], length=cfg["grid.length"], flow=flow,
        t_final=cfg["t_final"], dt=cfg["dt"], theta0=cfg["initial.theta0"],
        amplitude=cfg["initial.amplitude"], modes=cfg["compare.modes"], phase_seed=cfg["seed"],
        tolerance=cfg["tolerance"], dealias=cfg["dealias"], refine=cfg["compare.refine"])


def _run_equivalence(args):
    ecfg, zero = args
    return transform.equivalence_run(ecfg, zero=zero)


def cmd_compare(cfg: RunConfig, jobs: int = 1) -> int:
    ns = cfg["compare.ns"] or (cfg["algebra.n"],)
    tasks = [(_equivalence_config(cfg, n), cfg["compare.zero"]) for n in ns]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            reports = list(ex.map(_run_equivalence, tasks))
    else:
        reports = [_run_equivalence(t) for t in tasks]
    out = _outdir(cfg)
    passed = all(r["passed"] for r in reports)
    doc = reports[0] if len(reports) == 1 else {"runs": reports, "passed": passed}
    io.write_report(out / "report.json", doc)
    io.write_manifest(out / "manifest.txt", cfg.echo(), {"tolerance": cfg["tolerance"]},
                      {"command": "compare", "config_hash": ",".join(r["config_hash"] for r in reports)})
    for r in reports:
        n = r["config"]["n"]
        if "failure" in r:
            print(f"[N={n}] failed: {r['failure']}")
            continue
        print(f"[N={n}] {'pass' if r['passed'] else 'FAIL'}")
        for key, q in r.get("quantities", {}).items():
            order = q.get("order")
            o = "floor" if order is None else f"{order:.2f}"
            print(f"  {key:<24s} {q['max']:10.3e}  order {o:>6s}  {'ok' if q['pass'] else 'FAIL'}")
    return EXIT_OK if passed else EXIT_FAIL


# ----------------------------------------------------------------------
# hamiltonians

HAM_HEADER = ["kind", "H1", "H2", "H3", "H4", "arclength", "curvature_min", "curvature_max"]


def hamiltonian_row(values, grid: Grid, meta: dict):
    """H1..H4 in the q normalisation, arclength and curvature extrema."""
    kind, n = meta["kind"], int(meta["n"])
    al = CPN(n)
    if kind == "q":
        st = hierarchy.HasimotoState(values, grid, al, float(meta.get("time", 0.0)))
        hs = [hierarchy.hamiltonian(k, st) for k in (1, 2, 3, 4)]
        curv = np.sqrt(np.maximum(al.inner_m(st.q, st.q), 0.0) / al.efac)
        return [kind] + hs + [grid.length, float(curv.min()), float(curv.max())]
    if kind == "coords":
        values = mapping.embed(mapping.MapCoords(values[0], values[1], grid), al).gamma_map
        kind_t = "map"
    else:
        kind_t = kind
    if kind_t == "map":
        t = values / al.kappa
    elif kind_t == "curve":
        slope = np.asarray(meta.get("meta", {}).get("slope", np.zeros((n + 1, n + 1)).tolist()))
        slope = slope[..., 0] + 1j * slope[..., 1] if slope.ndim == 3 else slope
        t = grid.dx(values) + slope
    else:
        t = values
    spin = geo.SpinState(t, grid, al)
    hs = [geo.spin_hamiltonian(k, spin) * geo.SPIN_H_SCALE[k](al.efac) for k in (1, 2, 3, 4)]
    arc = float(quadrature(np.sqrt(np.maximum(geo.sqnorm(al, spin.t_field), 0.0)), grid))
    curv = np.sqrt(np.maximum(geo.sqnorm(al, spin.d(1)), 0.0))
    return [kind] + hs + [arc, float(curv.min()), float(curv.max())]


def cmd_hamiltonians(path) -> int:
    values, grid, meta = io.read_snapshot(path)
    r = hamiltonian_row(values, grid, meta)
    print(",".join(HAM_HEADER))
    print(",".join([r[0]] + [io.fmt(v) for v in r[1:]]))
    return EXIT_OK


# ----------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="hasimoto", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value configuration file")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides output_dir)")
    common.add_argument("--seed", type=int, metavar="U64", help="random seed (overrides seed and initial.seed)")
    common.add_argument("--jobs", type=int, default=1, metavar="K", help="parallel sweep entries")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run the identity suites")
    sub.add_parser("evolve", parents=[common], help="evolve one flow and write diagnostics")
    sub.add_parser("compare", parents=[common], help="cross-representation equivalence run")
    h = sub.add_parser("hamiltonians", parents=[common], help="conserved quantities of a snapshot")
    h.add_argument("snapshot", help="snapshot CSV (with its JSON sidecar)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "hamiltonians":
            return cmd_hamiltonians(args.snapshot)
        cfg = _load(args)
        if args.command == "verify":
            return cmd_verify(cfg, args.jobs)
        if args.command == "evolve":
            return cmd_evolve(cfg)
        return cmd_compare(cfg, args.jobs)
    except HasimotoError as err:
        print(f"error: {err}", file=sys.stderr)
        return _exit_code(err)


if __name__ == "__main__":
    sys.exit(main())
