"""Command-line frontend.

    confined-nlcs table      spectrum table: model formula vs. grid eigensolver
    confined-nlcs mandel     Mandel parameter against a_l
    confined-nlcs squeeze    quadrature squeezing against phi or a_l
    confined-nlcs identity   resolution-of-identity moments (JSON)
    confined-nlcs eval OP    one-shot evaluation of a single operation

Angles are in degrees, lengths in units of l0 = 1/(m omega), energies in
units of omega.  Options may also come from a JSON ``--config`` file; flags
given on the command line win.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError, NumericError, TruncationError
from .fock import heisenberg_phase_G
from .nlcs import (DEFAULT_EPS_TAIL, build_nlcs, gen_bessel_I, generalized_factorial,
                   identity_moment_check, mandel_parameter, photon_distribution,
                   quadrature_variance, squeeze_S_deformed, squeeze_s)
from .params import DeformationFunction, deformation_f, derive_params
from .spectra import (deformed_energy, model_energy, solve_confined_oscillator,
                      solve_model_potential)

EXIT_OK, EXIT_DOMAIN, EXIT_NONCONVERGED = 0, 2, 3

TABLE_A = (0.5, 1.0, 2.0, 3.0, 4.0)
FIG1_BETA_SQ = (0.5, 1.0, 1.5, 4.0)
FIG2_A = (0.5, 1.0, 2.5)
FIG3_PHI = (90.0, 100.0, 110.0)
FIG4_BETA_SQ = (1.0, 1.5, 2.5, 4.0)

FIG4_CAVEAT = (
    "S = 4(dX_A)^2 - <(n+1)f^2(n+1)> + <n f^2(n)> vanishes identically on exact "
    "eigenstates of A (<A^2> = beta^2, <A^dag A> = |beta|^2), so the values below are "
    "truncation-level zeros; they do not reproduce the strictly negative curves of the "
    "published deformed-squeezing figure."
)

DEFAULTS = {
    "a": 1.0, "m": 1.0, "omega": 1.0, "beta_re": 1.0, "beta_im": 0.0, "phi_deg": 0.0,
    "tail_eps": DEFAULT_EPS_TAIL, "tol": 1e-4, "out": None, "format": None,
    "workers": 1, "plot_script": None, "gamma_prime": None,
}


@dataclass(frozen=True)
class SweepSpec:
    """A 1-d grid over one variable, with the other inputs held fixed."""

    variable: str
    start: float
    stop: float
    steps: int
    fixed: dict = field(default_factory=dict)

    VARIABLES = ("a_l", "beta_sq", "phi")

    def __post_init__(self):
        if self.variable not in self.VARIABLES:
            raise DomainError(f"sweep variable must be one of {self.VARIABLES}, got {self.variable!r}")
        if int(self.steps) != self.steps or self.steps < 2:
            raise DomainError(f"sweep needs steps >= 2, got {self.steps!r}")
        if not self.start < self.stop:
            raise DomainError(f"sweep needs start < stop, got {self.start!r} >= {self.stop!r}")
        if self.variable == "a_l" and self.start <= 0:
            raise DomainError("a_l sweep must start above 0")
        if self.variable == "beta_sq" and self.start < 0:
            raise DomainError("beta_sq sweep must start at or above 0")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, int(self.steps))

    def describe(self) -> str:
        return f"{self.variable}={self.start!r}:{self.stop!r}:{self.steps}"


# ---------------------------------------------------------------------------
# per-point workers (module level so that they pickle for the process pool)

def _deformation_for(a_l, opts):
    if opts.get("gamma_prime") is not None:
        gp = float(opts["gamma_prime"])
        return DeformationFunction(gp, math.hypot(gp, 1.0))
    # a_l is a in units of l0, so a = a_l * l0
    l0 = 1.0 / (opts["m"] * opts["omega"])
    return derive_params(a_l * l0, opts["m"], opts["omega"])


def _mandel_point(job):
    a_l, beta_sq, opts = job
    p = _deformation_for(a_l, opts)
    st = build_nlcs(math.sqrt(beta_sq), p, opts["tail_eps"])
    return (a_l, beta_sq, p.gamma_prime, p.eta, st.trunc_dim, mandel_parameter(st))


def _squeeze_point(job):
    a_l, beta_sq, phi_deg, deformed, opts = job
    p = _deformation_for(a_l, opts)
    st = build_nlcs(math.sqrt(beta_sq), p, opts["tail_eps"])
    phi = math.radians(phi_deg)
    value = squeeze_S_deformed(st, phi) if deformed else squeeze_s(st, phi)
    return (a_l, beta_sq, phi_deg, p.gamma_prime, p.eta, st.trunc_dim, value)


def _table_point(job):
    a, n_levels, tol, m, omega = job
    p = derive_params(a, m, omega)
    box = solve_confined_oscillator(p, n_levels, tol)
    mod = solve_model_potential(p, n_levels, tol)
    return p, box, mod


def _run(func, jobs, workers):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map keeps grid order regardless of completion order
            return list(pool.map(func, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [func(j) for j in jobs]


# ---------------------------------------------------------------------------
# output helpers

def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.12g}"


def _csv(header: dict, columns, rows, notes=()) -> str:
    buf = io.StringIO()
    buf.write(f"# confined_nlcs {__version__}\n")
    for key, val in header.items():
        buf.write(f"# {key}={val}\n")
    for note in notes:
        buf.write(f"# note: {note}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _records(columns, rows):
    return [{c: (v.item() if hasattr(v, "item") else v) for c, v in zip(columns, row)} for row in rows]


def _emit(text: str, opts):
    if opts.get("out"):
        Path(opts["out"]).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_table(header, columns, rows, opts, notes=()):
    if opts["format"] == "json":
        doc = {"tool": f"confined_nlcs {__version__}", **header, "notes": list(notes),
               "rows": _records(columns, rows)}
        _emit(json.dumps(doc, indent=2) + "\n", opts)
    else:
        _emit(_csv(header, columns, rows, notes), opts)


def _write_plot_script(path, data_path, xcol, ycol, group_col, columns, title):
    """Write a gnuplot script plotting ``ycol`` against ``xcol``, one curve per ``group_col``."""
    xi, yi, gi = (columns.index(c) + 1 for c in (xcol, ycol, group_col))
    text = (
        f"# generated by confined_nlcs {__version__}\n"
        "set datafile separator ','\n"
        "set datafile commentschars '#'\n"
        f"set title '{title}'\n"
        f"set xlabel '{xcol}'\nset ylabel '{ycol}'\n"
        "set key outside\n"
        f"groups = system(\"grep -v '^#' {data_path} | tail -n +2 | cut -d, -f{gi} | sort -gu\")\n"
        f"plot for [g in groups] '{data_path}' every ::1 using "
        f"(strcol({gi}) eq g ? ${xi} : 1/0):{yi} with lines title '{group_col}='.g\n"
    )
    Path(path).write_text(text)


def _base_header(opts, **extra):
    head = {"m": _fmt(opts["m"]), "omega": _fmt(opts["omega"]), "tail_eps": _fmt(opts["tail_eps"])}
    if opts.get("gamma_prime") is not None:
        head["gamma_prime_override"] = _fmt(opts["gamma_prime"])
    head.update(extra)
    return head


# ---------------------------------------------------------------------------
# subcommands

def cmd_table(opts) -> int:
    a_list = opts.get("a_list") or TABLE_A
    n_levels = int(opts.get("n_levels") or 5)
    tol = float(opts["tol"])
    jobs = [(float(a), n_levels, tol, opts["m"], opts["omega"]) for a in a_list]
    results = _run(_table_point, jobs, opts["workers"])
    columns = ["n", "a", "model", "numerical", "numerical_err", "model_numerical",
               "model_numerical_err", "delta_model_numerical", "delta_model_check",
               "gamma_prime", "eta", "grid_points", "converged"]
    rows = []
    ok = True
    for n in range(n_levels):
        for p, box, mod in results:
            e_model = float(model_energy(n, p))
            conv = box.converged and mod.converged
            ok &= conv
            energies = (e_model, float(box.energies[n]), float(mod.energies[n]))
            if opts["format"] == "csv":
                # fixed decimals so columns line up with the published 8-digit table
                energies = tuple(f"{e:.10f}" for e in energies)
            rows.append((n, p.a, energies[0], energies[1], box.est_error[n], energies[2],
                         mod.est_error[n], e_model - box.energies[n], e_model - mod.energies[n],
                         p.gamma_prime, p.eta, max(box.grid_points, mod.grid_points), conv))
    header = _base_header(opts, tol=_fmt(tol), n_levels=n_levels,
                          a_list=";".join(_fmt(a) for a in a_list),
                          method="central FD, grids 500*2^k+1, Richardson h^2")
    _emit_table(header, columns, rows, opts)
    if not ok:
        print("warning: at least one eigensolve did not converge to --tol", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def _a_sweep(opts) -> SweepSpec:
    return SweepSpec("a_l", float(opts.get("a_start", 0.3)), float(opts.get("a_stop", 10.0)),
                     int(opts.get("steps", 98)))


def cmd_mandel(opts) -> int:
    sweep = _a_sweep(opts)
    beta_sq = opts.get("beta_sq") or FIG1_BETA_SQ
    jobs = [(float(a), float(b), opts) for b in beta_sq for a in sweep.values()]
    rows = _run(_mandel_point, jobs, opts["workers"])
    columns = ["a_l", "beta_sq", "gamma_prime", "eta", "trunc_dim", "M"]
    _emit_table(_base_header(opts, sweep=sweep.describe()), columns, rows, opts)
    if opts.get("plot_script") and opts.get("out"):
        _write_plot_script(opts["plot_script"], opts["out"], "a_l", "M", "beta_sq", columns,
                           "Mandel parameter")
    return EXIT_OK


def cmd_squeeze(opts) -> int:
    mode = opts.get("mode", "phi")
    deformed = bool(opts.get("deformed"))
    notes = ()
    if deformed:
        sweep = _a_sweep(opts)
        beta_sq = opts.get("beta_sq") or FIG4_BETA_SQ
        phis = opts.get("phi_list") or (float(opts["phi_deg"]),)
        jobs = [(float(a), float(b), float(ph), True, opts)
                for b in beta_sq for ph in phis for a in sweep.values()]
        notes = (FIG4_CAVEAT,)
        print(f"caveat: {FIG4_CAVEAT}", file=sys.stderr)
        x, group, value = "a_l", "beta_sq", "S"
    elif mode == "phi":
        sweep = SweepSpec("phi", float(opts.get("phi_start", 0.0)), float(opts.get("phi_stop", 180.0)),
                          int(opts.get("steps", 181)))
        a_list = opts.get("a_list") or FIG2_A
        beta_sq = opts.get("beta_sq") or (4.0,)
        jobs = [(float(a), float(b), float(ph), False, opts)
                for a in a_list for b in beta_sq for ph in sweep.values()]
        x, group, value = "phi_deg", "a_l", "s"
    elif mode == "a":
        sweep = _a_sweep(opts)
        phis = opts.get("phi_list") or FIG3_PHI
        beta_sq = opts.get("beta_sq") or (1.0,)
        jobs = [(float(a), float(b), float(ph), False, opts)
                for ph in phis for b in beta_sq for a in sweep.values()]
        x, group, value = "a_l", "phi_deg", "s"
    else:
        raise DomainError(f"unknown squeeze mode {mode!r}")
    rows = _run(_squeeze_point, jobs, opts["workers"])
    columns = ["a_l", "beta_sq", "phi_deg", "gamma_prime", "eta", "trunc_dim", value]
    header = _base_header(opts, mode="deformed" if deformed else mode, sweep=sweep.describe())
    _emit_table(header, columns, rows, opts, notes)
    if opts.get("plot_script") and opts.get("out"):
        _write_plot_script(opts["plot_script"], opts["out"], x, value, group, columns,
                           "deformed squeezing S" if deformed else "squeezing s")
    return EXIT_OK


def cmd_identity(opts) -> int:
    p = _deformation_for(float(opts["a"]), opts)
    alpha = opts.get("alpha", "eta")
    if alpha not in (None, "eta"):
        alpha = float(alpha)
    report = identity_moment_check(p, int(opts.get("n_max", 10)), alpha)
    if opts["format"] == "csv":
        d = report.to_dict()
        columns = ["n", "moment", "closed_form", "deviation", "quad_error", "converged"]
        rows = [tuple(r[c] for c in columns) for r in d["moments"]]
        header = _base_header(opts, a=_fmt(opts["a"]), gamma_prime=_fmt(report.gamma_prime),
                              eta=_fmt(report.eta), alpha=_fmt(report.alpha),
                              alpha_interpretation=report.alpha_interpretation)
        _emit(_csv(header, columns, rows), opts)
    else:
        doc = {"tool": f"confined_nlcs {__version__}", "a": opts["a"], "m": opts["m"],
               "omega": opts["omega"], **report.to_dict()}
        _emit(json.dumps(doc, indent=2) + "\n", opts)
    return EXIT_OK


EVAL_OPS = ("params", "deformation-f", "model-energy", "deformed-energy", "heisenberg-G",
            "generalized-factorial", "gen-bessel-I", "nlcs", "photon-distribution", "mandel",
            "quadrature-variance", "squeeze-s", "squeeze-S", "spectrum")


def cmd_eval(opts) -> int:
    op = opts["op"]
    p = _deformation_for(float(opts["a"]), opts)
    n = int(opts.get("n", 0))
    beta = complex(opts["beta_re"], opts["beta_im"])
    phi = math.radians(float(opts["phi_deg"]))
    out: dict = {"op": op}
    if op == "params":
        out.update({"gamma_prime": p.gamma_prime, "eta": p.eta})
        if hasattr(p, "gamma"):
            out.update({"a": p.a, "m": p.m, "omega": p.omega, "gamma": p.gamma, "l0": p.l0})
    elif op == "deformation-f":
        out["value"] = deformation_f(n, p)
    elif op == "model-energy":
        out["value"] = float(model_energy(n, derive_params(opts["a"], opts["m"], opts["omega"])))
    elif op == "deformed-energy":
        out["value"] = float(deformed_energy(n, p, opts["omega"]))
    elif op == "heisenberg-G":
        out["value"] = heisenberg_phase_G(n, p.deformation if hasattr(p, "deformation") else p)
    elif op == "generalized-factorial":
        out["value"] = generalized_factorial(n, p)
    elif op == "gen-bessel-I":
        out["value"] = gen_bessel_I(p.eta, p.gamma_prime, float(opts.get("x", 1.0)))
    elif op == "spectrum":
        cp = derive_params(opts["a"], opts["m"], opts["omega"])
        levels = int(opts.get("n_levels") or 5)
        box = solve_confined_oscillator(cp, levels, opts["tol"])
        mod = solve_model_potential(cp, levels, opts["tol"])
        out.update({"model": [float(e) for e in model_energy(np.arange(levels), cp)],
                    "numerical": box.energies.tolist(), "numerical_err": box.est_error.tolist(),
                    "model_numerical": mod.energies.tolist(),
                    "converged": bool(box.converged and mod.converged)})
    else:
        st = build_nlcs(beta, p, opts["tail_eps"])
        out.update({"beta_re": beta.real, "beta_im": beta.imag, "trunc_dim": st.trunc_dim,
                    "tail_bound": st.tail_bound})
        if op == "nlcs":
            out["coeffs_re"] = st.coeffs.real.tolist()
            out["coeffs_im"] = st.coeffs.imag.tolist()
        elif op == "photon-distribution":
            out["value"] = photon_distribution(st).tolist()
        elif op == "mandel":
            out["value"] = mandel_parameter(st)
        elif op == "quadrature-variance":
            out["value"] = quadrature_variance(st, phi, bool(opts.get("deformed")))
        elif op == "squeeze-s":
            out["value"] = squeeze_s(st, phi)
        elif op == "squeeze-S":
            out["value"] = squeeze_S_deformed(st, phi)
            out["note"] = FIG4_CAVEAT
        else:
            raise DomainError(f"unknown operation {op!r}")
    _emit(json.dumps(out, indent=2) + "\n", opts)
    if op == "spectrum" and not out["converged"]:
        return EXIT_NONCONVERGED
    return EXIT_OK


COMMANDS = {"table": cmd_table, "mandel": cmd_mandel, "squeeze": cmd_squeeze,
            "identity": cmd_identity, "eval": cmd_eval}


# ---------------------------------------------------------------------------
# argument parsing

def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common_parser():
    # SUPPRESS keeps unset flags out of the namespace so config values survive
    c = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = c.add_argument_group("global options")
    g.add_argument("--config", help="JSON file of option values (flags override it)")
    g.add_argument("--a", type=float, help="well half-width in units of l0 (default 1)")
    g.add_argument("--m", type=float, help="mass (default 1)")
    g.add_argument("--omega", type=float, help="oscillator frequency (default 1)")
    g.add_argument("--beta-re", type=float, help="Re(beta) for one-shot evaluations")
    g.add_argument("--beta-im", type=float, help="Im(beta) for one-shot evaluations")
    g.add_argument("--phi-deg", type=float, help="quadrature phase in degrees")
    g.add_argument("--tail-eps", type=float, help="NLCS tail tolerance (default 1e-14)")
    g.add_argument("--tol", type=float, help="eigenvalue tolerance (absolute, default 1e-4)")
    g.add_argument("--gamma-prime", type=float,
                   help="override the deformation: use this gamma' with eta = sqrt(gamma'^2 + 1)")
    g.add_argument("--out", help="write output here instead of stdout")
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--workers", type=int, help="worker processes for sweeps (default 1)")
    g.add_argument("--plot-script", help="also write a gnuplot script for the curves (needs --out)")
    return c


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="confined-nlcs", description=__doc__.split("\n\n")[0],
                                     parents=[common])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table", parents=[common], argument_default=argparse.SUPPRESS,
                       help="energy table: model formula vs. numerics")
    t.add_argument("--a-list", type=_float_list, help="half-widths (default 0.5,1,2,3,4)")
    t.add_argument("--n-levels", type=int, help="levels per half-width (default 5)")

    def sweep_args(sp):
        sp.add_argument("--a-start", type=float, help="first a_l (default 0.3)")
        sp.add_argument("--a-stop", type=float, help="last a_l (default 10)")
        sp.add_argument("--steps", type=int, help="grid points of the sweep")
        sp.add_argument("--beta-sq", type=_float_list, help="comma-separated |beta|^2 values")

    mnd = sub.add_parser("mandel", parents=[common], argument_default=argparse.SUPPRESS,
                         help="Mandel parameter against a_l")
    sweep_args(mnd)

    sq = sub.add_parser("squeeze", parents=[common], argument_default=argparse.SUPPRESS,
                        help="quadrature squeezing sweeps")
    sweep_args(sq)
    sq.add_argument("--mode", choices=("phi", "a"), help="sweep phi (default) or a_l")
    sq.add_argument("--deformed", action="store_true",
                    help="deformed-quadrature quantity S against a_l")
    sq.add_argument("--a-list", type=_float_list, help="a_l values for the phi sweep")
    sq.add_argument("--phi-list", type=_float_list, help="phases in degrees for a_l sweeps")
    sq.add_argument("--phi-start", type=float, help="first phase in degrees (default 0)")
    sq.add_argument("--phi-stop", type=float, help="last phase in degrees (default 180)")

    ident = sub.add_parser("identity", parents=[common], argument_default=argparse.SUPPRESS,
                           help="resolution-of-identity moments")
    ident.add_argument("--n-max", type=int, help="highest moment (default 10)")
    ident.add_argument("--alpha", help="'eta' (default) or a number")

    ev = sub.add_parser("eval", parents=[common], argument_default=argparse.SUPPRESS,
                        help="evaluate one operation")
    ev.add_argument("op", choices=EVAL_OPS)
    ev.add_argument("--n", type=int, help="level / Fock index")
    ev.add_argument("--x", type=float, help="argument of gen-bessel-I")
    ev.add_argument("--n-levels", type=int, help="levels for 'spectrum'")
    ev.add_argument("--deformed", action="store_true", help="use A instead of a")
    return parser


def resolve_options(ns: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS)
    given = vars(ns)
    if given.get("config"):
        cfg = json.loads(Path(given["config"]).read_text())
        if not isinstance(cfg, dict):
            raise DomainError("config file must hold a JSON object")
        opts.update({k.replace("-", "_"): v for k, v in cfg.items()})
    opts.update(given)
    if opts["format"] is None:
        opts["format"] = "json" if opts.get("command") in ("identity", "eval") else "csv"
    if opts["format"] not in ("csv", "json"):
        raise DomainError(f"format must be csv or json, got {opts['format']!r}")
    for key in ("a", "m", "omega", "tail_eps", "tol"):
        val = float(opts[key])
        if not (math.isfinite(val) and val > 0):
            raise DomainError(f"--{key.replace('_', '-')} must be positive and finite, got {val!r}")
        opts[key] = val
    opts["workers"] = max(1, int(opts["workers"]))
    return opts


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        opts = resolve_options(ns)
        return COMMANDS[opts["command"]](opts)
    except (DomainError, TruncationError, NumericError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
