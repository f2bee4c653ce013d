"""Command-line front end.

Commands: mesh (gen | inspect | convert), run, converge, longtime, check.
Flags override values from an optional flat ``key = value`` config file;
the effective configuration is echoed to the output directory so a run can
be reproduced bit-identically from it.

Exit codes: 0 ok, 2 config/mesh error, 3 solver failure, 4 property failure.
"""

import argparse
import sys
from pathlib import Path

from . import harness, mesh as meshmod, selfcheck
from .errors import DDFVError, MeshError, SolverError, ValidationError
from .fields import TensorSpec
from .scheme import SchemeParams, project_initial
from .solver import NewtonConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_PROPERTY = 4

CONFIG_KEYS = {
    "case": str,
    "family": str,
    "n": int,
    "mesh": str,
    "levels": int,
    "n0": int,
    "dt": float,
    "dt0": float,
    "tfinal": float,
    "kappa": float,
    "beta": float,
    "lam": str,
    "amplitude": float,
    "distortion": float,
    "newton_tol": float,
    "newton_max_iter": int,
    "seed": int,
    "out": str,
}

DEFAULTS = {
    "case": "decay",
    "family": "quad",
    "n": 8,
    "mesh": None,
    "levels": 3,
    "n0": 8,
    "dt": 4e-3,
    "dt0": 4e-3,
    "tfinal": None,
    "kappa": 0.0,
    "beta": 1.0,
    "lam": None,
    "amplitude": None,
    "distortion": None,
    "newton_tol": 1e-10,
    "newton_max_iter": 50,
    "seed": 0,
    "out": ".",
}


def load_config(path):
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = (t.strip() for t in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ValidationError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = CONFIG_KEYS[key](raw)
        except ValueError:
            raise ValidationError(
                f"{path}:{lineno}: cannot parse value for {key!r}"
            ) from None
    return values


def effective_config(args):
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(load_config(args.config))
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def write_effective_config(cfg, out_dir):
    lines = [f"{k} = {cfg[k]}" for k in sorted(cfg) if cfg[k] is not None]
    (out_dir / "effective_config").write_text("\n".join(lines) + "\n")


def _family_kwargs(cfg):
    kw = {}
    if cfg["family"] == "quad" and cfg["amplitude"] is not None:
        kw["amplitude"] = cfg["amplitude"]
    if cfg["family"] == "kershaw" and cfg["distortion"] is not None:
        kw["distortion"] = cfg["distortion"]
    return kw


def _load_mesh(cfg):
    if cfg["mesh"]:
        return meshmod.build_ddfv(meshmod.read_mesh(cfg["mesh"]))
    return meshmod.build_ddfv(
        meshmod.gen_family(cfg["family"], cfg["n"], **_family_kwargs(cfg))
    )


def _case_and_params(cfg, dt):
    case = harness.get_case(cfg["case"])
    lam = TensorSpec.parse(cfg["lam"]) if cfg["lam"] else case.lam
    newton = NewtonConfig(tol_residual_l1=cfg["newton_tol"],
                          max_iter=cfg["newton_max_iter"])
    t_final = cfg["tfinal"] if cfg["tfinal"] is not None else case.t_final
    params = SchemeParams(
        dt=dt, t_final=t_final, kappa=cfg["kappa"], beta=cfg["beta"],
        lam=lam, potential=case.potential, newton=newton,
    )
    return case, params


def _out_dir(cfg):
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- commands -----------------------------------------------------------


def cmd_mesh(args):
    cfg = effective_config(args)
    if args.action == "gen":
        primal = meshmod.gen_family(cfg["family"], cfg["n"], **_family_kwargs(cfg))
        out = _out_dir(cfg)
        path = out / f"{cfg['family']}_{cfg['n']}.mesh"
        meshmod.write_mesh(primal, path)
        ddfv = meshmod.build_ddfv(primal)
        print(f"wrote {path}")
    elif args.action == "inspect":
        if not cfg["mesh"]:
            raise ValidationError("mesh inspect needs --mesh PATH")
        ddfv = meshmod.build_ddfv(meshmod.read_mesh(cfg["mesh"]))
    else:  # convert
        if not cfg["mesh"]:
            raise ValidationError("mesh convert needs --mesh PATH")
        primal = meshmod.read_mesh(cfg["mesh"])
        out = _out_dir(cfg)
        path = out / (Path(cfg["mesh"]).stem + "_converted.mesh")
        meshmod.write_mesh(primal, path)
        ddfv = meshmod.build_ddfv(primal)
        print(f"wrote {path}")
    lam = TensorSpec.parse(cfg["lam"]) if cfg["lam"] else None
    print(meshmod.quality(ddfv, lam).summary())
    return EXIT_OK


def _trace_csv(records):
    lines = ["n,t,mass,energy,dissipation,dissipation_hat,penalty,min_u,"
             "newton_iters,newton_residual"]
    for r in records:
        opt = [r.dissipation, r.dissipation_hat, r.penalty_bracket]
        opt = ["" if v is None else repr(v) for v in opt]
        lines.append(
            f"{r.n},{r.t!r},{r.mass!r},{r.energy!r},{opt[0]},{opt[1]},"
            f"{opt[2]},{r.min_u!r},{r.newton_iterations},{r.newton_residual!r}"
        )
    return "\n".join(lines) + "\n"


def cmd_run(args):
    cfg = effective_config(args)
    out = _out_dir(cfg)
    write_effective_config(cfg, out)
    mesh = _load_mesh(cfg)
    case, params = _case_and_params(cfg, cfg["dt"])
    u0 = project_initial(mesh, case.u0)
    result = harness.simulate(mesh, params, u0)
    (out / "trace.csv").write_text(_trace_csv(result.records))
    last = result.records[-1]
    print(f"steps            {last.n}")
    print(f"final time       {last.t:.6g}")
    print(f"mass             {last.mass:.12e}")
    print(f"final energy     {last.energy:.12e}")
    print(f"min u (n>=1)     {result.min_u:.6e}")
    print(f"newton max/mean  {result.newton_max}/{result.newton_mean:.2f}")
    print(f"dt/h             {result.dt_over_h:.6g}")
    print(f"floor activated  {result.floor_ever_activated}")
    return EXIT_OK


def cmd_converge(args):
    cfg = effective_config(args)
    out = _out_dir(cfg)
    write_effective_config(cfg, out)
    case, _ = _case_and_params(cfg, cfg["dt0"])
    newton = NewtonConfig(tol_residual_l1=cfg["newton_tol"],
                          max_iter=cfg["newton_max_iter"])
    rows = harness.convergence_study(
        case, cfg["family"], cfg["levels"], n0=cfg["n0"], dt0=cfg["dt0"],
        kappa=cfg["kappa"], beta=cfg["beta"], newton=newton,
        family_kwargs=_family_kwargs(cfg),
    )
    (out / "convergence.csv").write_text(harness.rows_to_csv(rows))
    print(harness.rows_to_text(rows), end="")
    return EXIT_OK


def cmd_longtime(args):
    cfg = effective_config(args)
    out = _out_dir(cfg)
    write_effective_config(cfg, out)
    mesh = _load_mesh(cfg)
    case, params = _case_and_params(cfg, cfg["dt"])
    newton = NewtonConfig(tol_residual_l1=cfg["newton_tol"],
                          max_iter=cfg["newton_max_iter"])
    t_final = cfg["tfinal"] if cfg["tfinal"] is not None else 2.0
    result = harness.longtime_study(
        case, mesh, cfg["dt"], t_final, kappa=cfg["kappa"], beta=cfg["beta"],
        newton=newton,
    )
    (out / "energy_decay.csv").write_text(result.to_csv())
    if args.plot_script:
        (out / "plot_energy.py").write_text(_PLOT_SCRIPT)
    if result.saturated:
        print("fitted rate      saturated")
    else:
        print(f"fitted rate      {result.rate:.6g}")
        print(f"r_squared        {result.r_squared:.6f}")
    print(f"series length    {len(result.series)}")
    return EXIT_OK


_PLOT_SCRIPT = """\
import csv
import matplotlib.pyplot as plt

with open("energy_decay.csv") as f:
    rows = list(csv.DictReader(f))
t = [float(r["t"]) for r in rows]
e = [float(r["relative_energy"]) for r in rows]
plt.semilogy(t, e)
plt.xlabel("time")
plt.ylabel("relative energy")
plt.tight_layout()
plt.savefig("energy_decay.png", dpi=150)
"""


def cmd_check(args):
    cfg = effective_config(args)
    results = selfcheck.run_property_checks(cfg["seed"])
    print(f"seed {cfg['seed']}")
    for res in results:
        print(res.line())
    if all(r.passed for r in results):
        return EXIT_OK
    return EXIT_PROPERTY


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ddfv",
        description="Free-energy diminishing finite-volume solver for "
                    "drift-diffusion on distorted 2D meshes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--case", help="test case name")
        p.add_argument("--family", help="mesh family: uniform | quad | kershaw")
        p.add_argument("--n", type=int, help="cells per side")
        p.add_argument("--mesh", help="mesh file path")
        p.add_argument("--dt", type=float, help="time step")
        p.add_argument("--tfinal", type=float, help="final time")
        p.add_argument("--kappa", type=float, help="stabilization parameter")
        p.add_argument("--beta", type=float, help="penalization exponent")
        p.add_argument("--lam", help="tensor spec, e.g. identity or diag:1,1e-2")
        p.add_argument("--amplitude", type=float, help="quad family distortion")
        p.add_argument("--distortion", type=float, help="kershaw distortion")
        p.add_argument("--newton-tol", dest="newton_tol", type=float)
        p.add_argument("--newton-max-iter", dest="newton_max_iter", type=int)
        p.add_argument("--seed", type=int, help="seed for randomized checks")

    p_mesh = sub.add_parser("mesh", help="generate, inspect or convert meshes")
    p_mesh.add_argument("action", choices=["gen", "inspect", "convert"])
    add_common(p_mesh)
    p_mesh.set_defaults(func=cmd_mesh)

    p_run = sub.add_parser("run", help="single transient run with trace.csv")
    add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_conv = sub.add_parser("converge", help="mesh convergence study")
    add_common(p_conv)
    p_conv.add_argument("--levels", type=int, help="number of refinement levels")
    p_conv.add_argument("--n0", type=int, help="cells per side at level 0")
    p_conv.add_argument("--dt0", type=float, help="time step at level 0")
    p_conv.set_defaults(func=cmd_converge)

    p_long = sub.add_parser("longtime", help="relative-energy decay study")
    add_common(p_long)
    p_long.add_argument("--plot-script", action="store_true",
                        help="also emit a matplotlib plotting script")
    p_long.set_defaults(func=cmd_longtime)

    p_check = sub.add_parser("check", help="structural property suite")
    add_common(p_check)
    p_check.set_defaults(func=cmd_check)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MeshError, ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except DDFVError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
