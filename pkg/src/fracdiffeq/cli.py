"""Command-line interface.

Every command writes one machine-readable result (JSON ``{meta, data,
checks}`` or CSV) to ``--out`` or standard output and one human summary line
to standard error.  Exit status: 0 when every check passed, 1 when a check
failed, 2 for invalid input or configuration, 3 when a computation could
not be completed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as fio
from ._validation import SEED_ENV, rng_from_env
from .checks import Check, all_passed
from .examples import EXAMPLES
from .exceptions import DomainError, FracDiffError, UsageError
from .fracdiff import caputo_diff, frac_sum, rl_diff
from .kernels import FracOrder, cesaro_kernel, conv
from .linop import DenseOperator, Laplacian1D, operator_from_descriptor
from .poisson import parse_function, poisson_mass, poisson_ml_closed, poisson_transform
from .resolvent import build_family
from .selftest import report_lines, run_selftest
from .solver import hypothesis_report, residual, solve, solve_nonlinear_picard
from .weights import weighted_norm

__all__ = ["main", "build_parser"]

DEFAULT_TOL = 1e-9

# built-in defaults, applied after the config file and the command line
DEFAULTS = {
    "kernel": {"alpha": 1.5, "n": 10, "format": "json"},
    "frac": {"alpha": 1.5, "beta": 3.0, "n": 20, "format": "json"},
    "resolvent": {"alpha": 1.5, "n": 20, "method": "auto", "op": "zero", "dim": 1,
                  "format": "json"},
    "poisson": {"function": "exp:0.5", "n": 20, "format": "json"},
    "solve": {"format": "csv"},
    "example": {"format": "csv", "method": "auto"},
    "selftest": {"format": "json"},
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, help="order of the difference or kernel")
    p.add_argument("--beta", type=float, help="second order (kernel semigroup, test sequence)")
    p.add_argument("--n", "--steps", dest="n", type=int, help="horizon N")
    p.add_argument("--dim", type=int, help="state dimension")
    p.add_argument("--method", choices=["auto", "recurrence", "series", "beta"])
    p.add_argument("--tol", type=float, help=f"verification tolerance (default {DEFAULT_TOL:g})")
    p.add_argument("--config", type=Path, help="JSON options file (problem file for solve)")
    p.add_argument("--out", help="output path; standard output when omitted")
    p.add_argument("--format", choices=["csv", "json"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracdiffeq",
        description="Discrete fractional difference equations: kernels, resolvent "
                    "families, Poisson transforms and solvers.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel", help="Cesaro kernel k^alpha(0..N)")
    _common(p)

    p = sub.add_parser("frac", help="fractional sum and differences of a sequence")
    _common(p)
    p.add_argument("--input", type=Path, help="solution-format CSV with the sequence")

    p = sub.add_parser("resolvent", help="build and verify a resolvent family")
    _common(p)
    p.add_argument("--op", help="zero, laplacian, a JSON descriptor or a descriptor file")

    p = sub.add_parser("poisson", help="Poisson transform of a time function")
    _common(p)
    p.add_argument("--function", help="exp:<lambda>, galpha:<alpha> or ml:<alpha>,<beta>,<lambda>")

    p = sub.add_parser("solve", help="solve the problem described by --config")
    _common(p)

    p = sub.add_parser("example", help="run a worked example")
    _common(p)
    p.add_argument("name", choices=sorted(EXAMPLES))
    p.add_argument("--source", type=float, help="heat: amplitude of the initial pulse")
    p.add_argument("--shift", type=float, help="shifted: the shift gamma >= 0")

    p = sub.add_parser("selftest", help="run the acceptance suite")
    _common(p)
    return parser


def _options(args) -> dict:
    """Merge built-in defaults, the config file and the command line."""
    opts = dict(DEFAULTS[args.command])
    if args.config is not None and args.command != "solve":
        opts.update(fio.load_json_config(args.config, fio.OPTIONS_SCHEMA))
        if "steps" in opts:
            opts["n"] = opts.pop("steps")
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        opts[key] = value
    return opts


def _tol(opts) -> float:
    tol = float(opts.get("tol", DEFAULT_TOL))
    if not tol > 0:
        raise UsageError(f"--tol must be positive, got {tol}")
    return tol


class Outcome:
    """What a command produced: result document parts plus CSV rendering."""

    def __init__(self, meta, data, checks, csv_text=None, summary=""):
        self.meta = meta
        self.data = data
        self.checks = checks
        self.csv_text = csv_text
        self.summary = summary

    def document(self) -> dict:
        return fio.result_document(self.meta, self.data, self.checks)


# -- commands ---------------------------------------------------------------

def cmd_kernel(opts) -> Outcome:
    a = FracOrder.coerce(opts["alpha"]).alpha
    N = int(opts["n"])
    k = cesaro_kernel(a, N)
    checks = [Check("k0_equals_1", abs(k[0] - 1.0), 0.0)]
    if N >= 1:
        checks.append(Check("k1_equals_alpha", abs(k[1] - a) / a, 1e-15))
    data = {"n": list(range(N + 1)), "k": k}
    if "beta" in opts:
        b = FracOrder.coerce(opts["beta"]).alpha
        ref = cesaro_kernel(a + b, N)
        dev = float(np.max(np.abs(conv(k, cesaro_kernel(b, N)) - ref) / ref))
        checks.append(Check("semigroup_rel_err", dev, 1e-12))
        data["k_beta"] = cesaro_kernel(b, N)
    csv_text = fio.table_csv(["n", "k"], zip(range(N + 1), k.tolist()))
    return Outcome({"alpha": a, "N": N}, data, checks, csv_text, f"k^{a:g}(0..{N})")


def _read_sequence(path: Path) -> np.ndarray:
    u = fio.load_solution_csv(Path(path))
    return u[:, 0] if u.shape[1] == 1 else u


def cmd_frac(opts) -> Outcome:
    a = FracOrder.coerce(opts["alpha"])
    tol = opts.get("tol", 1e-11)
    if opts.get("input") is not None:
        u = _read_sequence(opts["input"])
        source = str(opts["input"])
    else:
        b = FracOrder.coerce(opts["beta"]).alpha
        u = cesaro_kernel(b, int(opts["n"]))
        source = f"k^{b:g}"
    N = u.shape[0] - 1
    if N < a.m:
        raise UsageError(f"the sequence needs horizon >= {a.m}, got {N}")
    s, rl, cap = frac_sum(a, u), rl_diff(a, u), caputo_diff(a, u)
    checks = []
    if opts.get("input") is None:
        # Delta^alpha k^beta(n) = k^{beta-alpha}(n+m)
        gamma = float(opts["beta"]) - a.alpha
        if gamma > 0:
            ref = cesaro_kernel(gamma, N)[a.m :]
            dev = float(np.max(np.abs(rl - ref) / np.maximum(np.abs(ref), 1e-300)))
            checks.append(Check("rl_of_kernel_rel_err", dev, tol))
    if a.m == 2 and not a.is_integer:
        uu = u if u.ndim > 1 else u[:, None]
        k = cesaro_kernel(2.0 - a.alpha, N)
        rhs = rl_diff(a, uu) - k[1:N, None] * (uu[1] - 2 * uu[0]) - k[2:, None] * uu[0]
        scale = np.maximum(np.abs(rhs), np.max(np.abs(uu)))
        dev = float(np.max(np.abs(caputo_diff(a, uu) - rhs) / scale))
        checks.append(Check("caputo_rl_identity", dev, tol))
    data = {"input": u, "sum": s, "rl": rl, "caputo": cap}
    csv_text = None
    if u.ndim == 1:
        pad = [math.nan] * a.m
        rows = zip(range(N + 1), u.tolist(), s.tolist(), rl.tolist() + pad, cap.tolist() + pad)
        csv_text = fio.table_csv(["n", "input", "sum", "rl", "caputo"], rows)
    meta = {"alpha": a.alpha, "N": N, "source": source, "m": a.m}
    return Outcome(meta, data, checks, csv_text, f"alpha={a.alpha:g} on {source}, N={N}")


def _operator(opts):
    op = opts["op"]
    if isinstance(op, dict):
        return operator_from_descriptor(op)
    if op == "zero":
        return DenseOperator(np.zeros((int(opts["dim"]),) * 2))
    if op == "laplacian":
        return Laplacian1D(0.0, math.pi, int(opts.get("dim", 40)))
    text = op.strip()
    if not text.startswith("{"):
        path = Path(text)
        if not path.exists():
            raise UsageError(f"--op: expected zero, laplacian, JSON or a file, got {op!r}")
        return operator_from_descriptor(fio.load_json_config(path, fio.OPERATOR_SCHEMA))
    try:
        return operator_from_descriptor(json.loads(text))
    except json.JSONDecodeError as exc:
        raise UsageError(f"--op: invalid JSON at column {exc.colno}: {exc.msg}") from None


def cmd_resolvent(opts) -> Outcome:
    A = _operator(opts)
    tol = _tol(opts)
    F = build_family(A, opts["alpha"], int(opts["n"]), opts["method"])
    d = A.dim
    checks = [
        Check("functional_residual", float(np.max(F.functional_residual())), tol),
        Check("difference_residual", float(np.max(F.difference_residual())), tol)
        if F.N >= 2 else Check("difference_residual", 0.0, tol),
        Check("commutation_residual", float(np.max(F.commutation_residual())), tol),
    ]
    R = A.resolve(1.0, np.eye(d))
    checks.append(Check("S0_equals_resolvent", float(np.max(np.abs(F.table[0] - R)))
                        / max(1.0, float(np.max(np.abs(R)))), tol))
    if not np.any(A.to_dense()):
        k = cesaro_kernel(F.alpha, F.N)
        dev = float(np.max(np.abs(F.table - k[:, None, None] * np.eye(d)) / k[:, None, None]))
        checks.append(Check("zero_operator_kernel", dev, 1e-15))
    if F.method == "beta":
        checks.append(Check("beta_unflagged", float(not F.diagnostics["flagged"]), relation="true"))
    data = F.to_json()
    data["diagnostics"] = F.diagnostics
    data["operator"] = A.to_descriptor()
    header = ["n"] + [f"s_{i}_{j}" for i in range(d) for j in range(d)]
    rows = ([n, *F.table[n].ravel().tolist()] for n in range(F.N + 1))
    meta = {"alpha": F.alpha, "N": F.N, "d": d, "method": F.method}
    return Outcome(meta, data, checks, fio.table_csv(header, rows),
                   f"{F.method} family, alpha={F.alpha:g}, d={d}, N={F.N}, "
                   f"sup_norm={F.sup_norm:.6g}")


def _poisson_reference(desc: str, ns):
    kind, _, rest = desc.partition(":")
    args = [float(x) for x in rest.split(",")]
    if kind == "exp":
        return (1.0 + args[0]) ** -(ns + 1.0)
    if kind == "galpha":
        return cesaro_kernel(args[0], int(ns[-1]))
    if kind == "ml":
        return np.array([poisson_ml_closed(*args, int(n)) for n in ns])
    return None


def cmd_poisson(opts) -> Outcome:
    desc = opts["function"]
    psi = parse_function(desc)
    N = int(opts["n"])
    tol = opts.get("tol", 1e-8)
    ns = np.arange(N + 1)
    vals = poisson_transform(psi, ns)
    ref = _poisson_reference(desc, ns)
    mass = max(abs(poisson_mass(int(n)) - 1.0) for n in ns)
    checks = [Check("poisson_mass", mass, 1e-12)]
    data = {"n": ns, "value": vals}
    if ref is not None:
        dev = float(np.max(np.abs(vals - ref) / np.abs(ref)))
        checks.append(Check("closed_form_rel_err", dev, tol))
        data["closed_form"] = ref
    cols = [ns.tolist(), vals.tolist()] + ([ref.tolist()] if ref is not None else [])
    header = ["n", "value"] + (["closed_form"] if ref is not None else [])
    csv_text = fio.table_csv(header, zip(*cols))
    return Outcome({"function": desc, "N": N}, data, checks, csv_text, f"P({desc})(0..{N})")


def cmd_solve(opts) -> Outcome:
    if opts.get("config") is None:
        raise UsageError("solve needs --config <problem.json>")
    cfg = fio.load_json_config(opts["config"], fio.PROBLEM_SCHEMA)
    P, W, method = fio.problem_from_config(cfg)
    method = opts.get("method") or method
    tol = _tol(opts)
    F = build_family(P.A, P.alpha.alpha, P.N, method)
    u = solve(P, F)
    res = residual(u, P)
    wn = weighted_norm(u, W)
    checks = [
        Check("residual", res, tol),
        Check("initial_u0", float(np.max(np.abs(u[0] - P.u0))), 1e-12),
        Check("initial_u1", float(np.max(np.abs(u[1] - P.u1))), 1e-12),
    ]
    data = {"residual": res, "weighted_norm": wn, "H": W.H, "weight": W.describe(),
            "sup_norm": F.sup_norm, "method": F.method}
    if P.kind == "nonlinear":
        data["hypotheses"] = hypothesis_report(P, F, W, rng=rng_from_env())
        if not (np.any(P.u0) or np.any(P.u1)):
            pic = solve_nonlinear_picard(P, F, W)
            data["contraction"] = {"estimate": pic.contraction_estimate, "bound": pic.bound,
                                   "iterations": pic.iterations, "converged": pic.converged}
            checks.append(Check("picard_converged", float(pic.converged), relation="true"))
            checks.append(Check("weighted_norm_finite", wn, relation="finite"))
    meta = {"alpha": P.alpha.alpha, "N": P.N, "d": P.d, "kind": P.kind,
            "config": str(opts["config"])}
    out = Outcome(meta, data, checks, fio.solution_csv(u),
                  f"{P.kind} problem, alpha={P.alpha.alpha:g}, d={P.d}, N={P.N}, "
                  f"residual={res:.3e}")
    out.solution = u
    return out


def cmd_example(opts) -> Outcome:
    name = opts["name"]
    kw = {}
    if "dim" in opts:
        kw["dim"] = int(opts["dim"])
    if "n" in opts:
        kw["steps"] = int(opts["n"])
    kw["method"] = opts["method"]
    if name == "heat":
        if "alpha" in opts:
            kw["alpha"] = float(opts["alpha"])
        if "source" in opts:
            kw["source"] = float(opts["source"])
    elif "alpha" in opts:
        raise UsageError(f"example {name} has alpha = 2; --alpha is not accepted")
    if name == "shifted" and "shift" in opts:
        kw["shift"] = float(opts["shift"])
    ex = EXAMPLES[name](**kw)
    checks = ex.checks
    if "tol" in opts:
        tol = _tol(opts)
        checks = [Check(c.name, c.value, tol, c.relation) if "residual" in c.name else c
                  for c in checks]
    data = dict(ex.meta)
    data["grid"] = ex.grid
    out = Outcome({"example": name, **{k: v for k, v in kw.items()}}, data, checks,
                  fio.solution_csv(ex.u), f"example {name}")
    out.solution = ex.u
    return out


def cmd_selftest(opts) -> Outcome:
    results = run_selftest()
    for line in report_lines(results):
        print(line, file=sys.stderr)
    checks = [Check(f"criterion_{c.number:02d}", float(c.passed), relation="true") for c in results]
    data = {"criteria": [c.as_dict() for c in results]}
    n_pass = sum(c.passed for c in results)
    return Outcome({"suite": "acceptance"}, data, checks, None,
                   f"selftest: {n_pass}/{len(results)} criteria")


COMMANDS = {
    "kernel": cmd_kernel,
    "frac": cmd_frac,
    "resolvent": cmd_resolvent,
    "poisson": cmd_poisson,
    "solve": cmd_solve,
    "example": cmd_example,
    "selftest": cmd_selftest,
}


def _emit(outcome: Outcome, opts) -> None:
    out = opts.get("out")
    fmt = opts["format"]
    if fmt == "json" or outcome.csv_text is None:
        doc = outcome.document()
        if hasattr(outcome, "solution"):
            doc["data"]["u"] = outcome.solution
        fio.write_text(fio.dumps(doc), out)
        return
    fio.write_text(outcome.csv_text, out)
    if out is not None and str(out) != "-":
        # sidecar with the same meta/data/checks layout
        fio.write_text(fio.dumps(outcome.document()), fio.sidecar_path(out))


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = _options(args)
        if args.command == "solve":
            opts["config"] = args.config
        outcome = COMMANDS[args.command](opts)
        outcome.meta = {"command": args.command, "version": __version__, **outcome.meta}
        if args.command == "selftest":
            outcome.meta["seed_env"] = SEED_ENV
        _emit(outcome, opts)
    except (UsageError, DomainError) as exc:
        print(f"fracdiffeq {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except FracDiffError as exc:
        print(f"fracdiffeq {args.command}: failed: {exc}", file=sys.stderr)
        return 3
    ok = all_passed(outcome.checks)
    n_pass = sum(c.passed for c in outcome.checks)
    status = "ok" if ok else "FAILED " + ", ".join(c.name for c in outcome.checks if not c.passed)
    print(f"{outcome.summary}; {n_pass}/{len(outcome.checks)} checks passed; {status}",
          file=sys.stderr)
    return 0 if ok else 1


def main(argv=None) -> None:
    sys.exit(run(argv))
