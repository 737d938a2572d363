"""Command-line front end.

Exit codes: 0 completed and not ruled out, 1 ruled out (a violated bound or
an infeasible POVM search), 2 input or validation error, 3 solver failure.
"""

import argparse
import json
import sys

import numpy as np

from . import __version__, _convex
from .bounds import (
    AnalysisConfig,
    analyze,
    bound_candidates,
    bound_general_partial,
    bound_optimized_mixed,
    bound_pure,
    bound_support_max,
    d_ppt_estimate,
    ppt_povm_feasibility,
)
from .ensembles import CATALOG, catalog, parse, parse_states, serialize
from .exceptions import SolverError, ValidationError
from .measures import mixed_measures, pure_measures, support_robustness_ratio
from .qla import RANK_TOL, support_projector
from .subspaces import DEFAULT_STARTS, is_product_spanned, max_robustness_in_subspace, min_geometric_in_subspace

REPORT_SCHEMA_VERSION = 1
BOUND_CHOICES = ("pure", "support-max", "candidate", "optimized-mixed", "general-partial", "all")


class InputError(Exception):
    pass


def _param(text):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter {key!r} must be a real number, got {value!r}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="loccbound", description="Necessary conditions for LOCC discrimination of "
                                "orthogonal bipartite states.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_text, needs_input=True):
        sp = sub.add_parser(name, help=help_text)
        if needs_input:
            src = sp.add_mutually_exclusive_group(required=True)
            src.add_argument("--file", help="ensemble JSON file")
            src.add_argument("--catalog", choices=sorted(CATALOG), help="named catalog ensemble")
        else:
            sp.add_argument("name", choices=sorted(CATALOG))
        sp.add_argument("--param", action="append", type=_param, default=[], metavar="KEY=VALUE",
                        help="catalog parameter (repeatable)")
        sp.add_argument("--alpha", type=float, help="shorthand for --param alpha=...")
        sp.add_argument("--beta", type=float, help="shorthand for --param beta=...")
        sp.add_argument("--tol-rank", type=float, default=RANK_TOL)
        sp.add_argument("--tol-feas", type=float, default=_convex.POVM_THRESHOLD)
        sp.add_argument("--bisect-tol", type=float, default=_convex.BISECT_TOL)
        sp.add_argument("--starts", type=int, default=DEFAULT_STARTS)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--method", choices=_convex.METHODS, default="sdp",
                        help="convex backend: direct SDP or bisection with alternating projections")
        sp.add_argument("--mixed-starts", type=int, default=AnalysisConfig.mixed_starts)
        sp.add_argument("--mixed-iters", type=int, default=AnalysisConfig.mixed_iters)
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--out", help="write the report here instead of stdout")
        return sp

    add("schmidt", "Schmidt decomposition of each pure state")
    add("measures", "entanglement measures of each state")
    add("subspace-max", "entanglement extremes and product vectors in each support")
    add("feasibility", "PPT POVM feasibility search")
    add("bound", "evaluate bound chains").add_argument("--which", choices=BOUND_CHOICES, default="all")
    add("analyze", "all bounds plus the feasibility search")
    add("catalog", "print a catalog ensemble as JSON", needs_input=False)
    return p


def _catalog_params(args):
    params = dict(args.param)
    if args.alpha is not None:
        params["alpha"] = args.alpha
    if args.beta is not None:
        params["beta"] = args.beta
    return dict(sorted(params.items()))


def _config(args):
    return AnalysisConfig(rank_tol=args.tol_rank, feas_tol=args.tol_feas, bisect_tol=args.bisect_tol,
                          starts=args.starts, seed=args.seed, method=args.method,
                          mixed_starts=args.mixed_starts, mixed_iters=args.mixed_iters)


def _read(path):
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load_states(args):
    """``(dims, states, names)``; files may hold a single state for per-state commands."""
    if args.catalog:
        e = catalog(args.catalog, _catalog_params(args))
        return e.dims, list(e.states), list(e.names)
    dims, states, names, _ = parse_states(_read(args.file))
    return dims, states, names


def _load_ensemble(args):
    if args.catalog:
        return catalog(args.catalog, _catalog_params(args))
    return parse(_read(args.file))


def _input_desc(args):
    if getattr(args, "catalog", None):
        return {"catalog": args.catalog, "params": _catalog_params(args)}
    return {"file": args.file}


def _floats(a):
    return [float(x) for x in np.asarray(a).ravel()]


# -- commands -------------------------------------------------------------------
# each returns (body, ruled_out, text_lines)


def cmd_schmidt(args, cfg):
    _, states, names = _load_states(args)
    rows, text = [], []
    for name, sigma in zip(names, states):
        psi = sigma.as_pure(cfg.rank_tol)
        if psi is None:
            rows.append({"name": name, "pure": False, "coefficients": None, "rank": None})
            text.append(f"{name}: not a pure state (rank {sigma.rank(cfg.rank_tol)})")
            continue
        lam = psi.schmidt.coefficients
        rows.append({"name": name, "pure": True, "coefficients": _floats(lam), "rank": int(psi.schmidt.rank)})
        text.append(f"{name}: Schmidt rank {psi.schmidt.rank}, lambda = [{', '.join(f'{x:.10g}' for x in lam)}]")
    return {"states": rows}, False, text


def cmd_measures(args, cfg):
    _, states, names = _load_states(args)
    rows, text = [], []
    for name, sigma in zip(names, states):
        psi = sigma.as_pure(cfg.rank_tol)
        mm = mixed_measures(sigma, method=cfg.method, tol=cfg.bisect_tol, rank_tol=cfg.rank_tol)
        row = {"name": name, "pure": psi is not None, "S": mm.vn_entropy, "R_g": mm.global_robustness_lb,
               "R_gMethod": mm.robustness_method, "alpha": mm.alpha, "calR": mm.calR}
        if psi is not None:
            pm = pure_measures(psi)
            row.update({"R": pm.robustness, "E_R": pm.rel_entropy, "G": pm.geometric})
            text.append(f"{name}: R = {pm.robustness:.10g}, E_R = {pm.rel_entropy:.10g}, G = {pm.geometric:.10g}")
        else:
            row["r"] = support_robustness_ratio(sigma, method=cfg.method, tol=cfg.bisect_tol, rank_tol=cfg.rank_tol)
            text.append(f"{name}: S = {mm.vn_entropy:.10g}, R_g >= {mm.global_robustness_lb:.10g} "
                        f"({mm.robustness_method}), alpha = {mm.alpha:.10g}, calR = {mm.calR:.10g}, r = {row['r']:.10g}")
        row["d_ppt"] = d_ppt_estimate(sigma, tol=cfg.bisect_tol, method=cfg.method, rank_tol=cfg.rank_tol)
        text[-1] += f", d_ppt = {row['d_ppt']:.10g}"
        rows.append(row)
    return {"states": rows}, False, text


def cmd_subspace_max(args, cfg):
    _, states, names = _load_states(args)
    rows, text = [], []
    for i, (name, sigma) in enumerate(zip(names, states)):
        support = support_projector(sigma, cfg.rank_tol)
        rmax = max_robustness_in_subspace(support, starts=cfg.starts, seed=cfg.seed + i)
        gmin = min_geometric_in_subspace(support, starts=cfg.starts, seed=cfg.seed + i)
        content = is_product_spanned(support, starts=cfg.starts, seed=cfg.seed + i)
        rows.append({
            "name": name,
            "supportDim": support.dim,
            "maxRobustness": rmax.value,
            "maxRobustnessSchmidt": _floats(rmax.argmax.schmidt.coefficients),
            "maxRobustnessConverged": rmax.converged,
            "minGeometric": gmin.value,
            "isProductSpanned": content.is_product_spanned,
            "productMethod": content.method,
            "productVectorsFound": len(content.product_vectors),
        })
        text.append(f"{name}: support dim {support.dim}, max R >= {rmax.value:.10g}, min G <= {gmin.value:.10g}, "
                    f"product-spanned = {str(content.is_product_spanned).lower()} ({content.method})")
    return {"supports": rows}, False, text


def _feasibility_text(f):
    status = "feasible" if f.feasible else "INFEASIBLE (not certified)"
    return [f"PPT POVM search [{f.method}]: {status}, residual {f.residual:.3e}, iterations {f.iterations}"]


def cmd_feasibility(args, cfg):
    e = _load_ensemble(args)
    f = ppt_povm_feasibility(e, method=cfg.method, threshold=cfg.feas_tol)
    return {"feasibility": f.to_dict(include_povm=True)}, not f.feasible, _feasibility_text(f) + [f.note]


def _report_text(r):
    lines = [f"[{r.inequality_id}] N = {r.n}, D = {r.d}: {r.verdict}"]
    for label, value in zip(r.bound_labels, r.bound_values):
        if value is None:
            lines.append(f"  N <= {label} = not evaluated")
        else:
            stamp = "VIOLATED" if r.n > value + 1e-9 else "SATISFIED"
            lines.append(f"  N = {r.n} <= {label} = {value:.10g}  {stamp}")
    return lines


def cmd_bound(args, cfg):
    e = _load_ensemble(args)
    which = BOUND_CHOICES[:-1] if args.which == "all" else (args.which,)
    common = {"method": cfg.method, "bisect_tol": cfg.bisect_tol, "rank_tol": cfg.rank_tol}
    reports = []
    d_vals = None
    if any(w in ("candidate", "optimized-mixed", "general-partial") for w in which):
        d_vals = [d_ppt_estimate(s, tol=cfg.bisect_tol, method=cfg.method, rank_tol=cfg.rank_tol) for s in e.states]
    for w in which:
        if w == "pure":
            pure = [s.as_pure(cfg.rank_tol) for s in e.states]
            if any(p is None for p in pure):
                if args.which == "pure":
                    raise ValidationError("the pure-state bound needs rank-one states")
                continue
            reports.append(bound_pure(pure, list(e.names)))
        elif w == "support-max":
            reports.append(bound_support_max(e, starts=cfg.starts, seed=cfg.seed, rank_tol=cfg.rank_tol))
        elif w == "candidate":
            reports.append(bound_candidates(e, e.states, d_values=d_vals, **common))
        elif w == "optimized-mixed":
            reports.append(bound_optimized_mixed(e, starts=cfg.mixed_starts, iters=cfg.mixed_iters, seed=cfg.seed,
                                                 d_values=d_vals, **common))
        else:
            reports.append(bound_general_partial(e, d_values=d_vals, **common))
    text = [line for r in reports for line in _report_text(r)]
    notes = sorted({n for r in reports for n in r.direction_notes})
    return {"reports": [r.to_dict() for r in reports]}, any(r.violated for r in reports), text + notes


def cmd_analyze(args, cfg):
    a = analyze(_load_ensemble(args), cfg)
    text = [line for r in a.reports for line in _report_text(r)]
    text += _feasibility_text(a.feasibility)
    for name, pc in a.product_content:
        text.append(f"support of {name}: product-spanned = {str(pc.is_product_spanned).lower()} ({pc.method}, "
                    "auxiliary)")
    text.append(f"LOCC perfect discrimination: {a.verdict}")
    return a.to_dict(), a.ruled_out, text


COMMANDS = {
    "schmidt": cmd_schmidt,
    "measures": cmd_measures,
    "subspace-max": cmd_subspace_max,
    "feasibility": cmd_feasibility,
    "bound": cmd_bound,
    "analyze": cmd_analyze,
}


def _header(args, cfg):
    return {
        "tool": "loccbound",
        "version": __version__,
        "reportSchemaVersion": REPORT_SCHEMA_VERSION,
        "command": args.command,
        "input": _input_desc(args),
        "config": cfg.to_dict(),
    }


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "catalog":
            _emit(serialize(catalog(args.name, _catalog_params(args))).decode("utf-8"), args.out)
            return 0
        cfg = _config(args)
        body, ruled_out, text = COMMANDS[args.command](args, cfg)
    except (ValidationError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        extra = f" (bracket {exc.bracket})" if exc.bracket is not None else ""
        print(f"solver error: {exc}{extra}", file=sys.stderr)
        return 3
    if args.format == "json":
        doc = {**_header(args, cfg), **body}
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    else:
        head = [f"loccbound {args.command}  input={json.dumps(_input_desc(args))}",
                "config: " + ", ".join(f"{k}={v}" for k, v in cfg.to_dict().items())]
        _emit("\n".join(head + text) + "\n", args.out)
    return 1 if ruled_out else 0


def main(argv=None):
    sys.exit(run(argv))
