"""``qh``: command-line front end.

Each subcommand parses its inputs, calls one library function and writes
JSON (or CSV for ensembles).  With ``--out`` the result goes to that file,
written atomically, and the resolved configuration is echoed next to it as
``<out>.config.json``; otherwise JSON goes to stdout.

Exit status: 0 on success (and, for checking commands, when every verdict
passes), 1 on a library error or a failed verdict, 2 on bad usage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import conditioning as cond
from . import harness
from .errors import QHError
from .identities import run_identity_suite
from .params import AffineMap, DeltaPair, HarnessSpec, QHParams
from .scalar import parse_scalar, to_jsonable
from .sim import processes as procs
from .sim import transforms as tr
from .sim.io import atomic_write, read_csv, write_csv
from .verify import Prediction, compare_to_prediction, fit_conditional_variance

GLUE_CASE_NUMBERS = {cond.WIENER: "i", cond.BIPOISSON: "ii", cond.UPPER_BOUNDARY: "iii"}


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# argument helpers


def _load_json(text):
    if text is None:
        raise UsageError("--params is required")
    if os.path.exists(text):
        with open(text) as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"cannot parse JSON: {exc}") from None


def _floats(text, n=None, flag=""):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"{flag}: expected {n} numbers, got {len(vals)}")
    return vals


def _scalars(text, mode, n, flag):
    parts = [x.strip() for x in text.split(",")]
    if len(parts) != n:
        raise UsageError(f"{flag}: expected {n} values, got {len(parts)}")
    try:
        return [parse_scalar(x, mode) for x in parts]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"{flag}: cannot parse {text!r}") from None


def _num(args, name, required=True):
    val = getattr(args, name)
    if val is None:
        if required:
            raise UsageError(f"--{name} is required")
        return None
    try:
        return parse_scalar(val, args.mode)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--{name}: cannot parse {val!r}") from None


def _params(args) -> QHParams:
    return QHParams.from_json(_load_json(args.params), args.mode)


def _emit(args, payload, config):
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        atomic_write(args.out, text)
        _echo_config(args.out, config)
    else:
        sys.stdout.write(text)


def _echo_config(out, config):
    atomic_write(out + ".config.json", json.dumps(config, indent=2, sort_keys=True) + "\n")


def _config(args, **extra):
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",) and v is not None}
    cfg.update(extra)
    return cfg


# --------------------------------------------------------------------------
# qh-core commands


def cmd_transform(args):
    obj = _load_json(args.params)
    spec = HarnessSpec.from_json(obj, args.mode)
    if args.affine:
        f = AffineMap(*_scalars(args.affine, args.mode, 6, "--affine"))
        out = harness.affine_transform_spec(spec, f)
        payload = {"spec": out.to_json(), "map": f.to_json(), "consistency_residual": to_jsonable(out.consistency_residual())}
    else:
        if args.cov_product is None and "cov_product" not in obj:
            raise UsageError("transform needs --affine, or --cov-product / a 'cov_product' entry to standardize")
        text = args.cov_product or ",".join(str(x) for x in obj["cov_product"])
        prod = _scalars(text, args.mode, 4, "--cov-product")
        sf = harness.harness_to_qh(spec.mean, prod, spec.var_form, spec.interval)
        payload = {
            "params": sf.params.to_json(),
            "map": sf.transform.to_json(),
            "interval": [to_jsonable(x) for x in sf.interval],
            "chi_tilde": to_jsonable(sf.chi_tilde),
        }
    _emit(args, payload, _config(args))
    return 0


def cmd_bridge(args):
    p = _params(args)
    R, V, z_R, z_V = (_num(args, k) for k in ("R", "V", "zr", "zv"))
    res = cond.bridge_params(p, R, V, z_R, z_V)
    d = res.data
    payload = {
        "params": res.params.to_json(),
        "bridge": {k: to_jsonable(getattr(d, k)) for k in ("R", "V", "z_R", "z_V", "slope", "pivot", "denom", "K", "M")},
        "invariant": to_jsonable(cond.bridge_invariant(res.params)),
        "map": d.affine_map().to_json(),
    }
    _emit(args, payload, _config(args))
    return 0


def cmd_condition(args):
    p = _params(args)
    if args.V is not None and args.zv is not None and args.R is None:
        res = cond.condition_on_future(p, _num(args, "V"), _num(args, "zv"))
        side = "future"
    elif args.R is not None and args.zr is not None and args.V is None:
        res = cond.condition_on_past(p, _num(args, "R"), _num(args, "zr"))
        side = "past"
    else:
        raise UsageError("condition needs either --V and --zv, or --R and --zr")
    payload = {"side": side, "params": res.params.to_json(), "map": res.transform.to_json(), "kappa_sq": to_jsonable(res.kappa_sq)}
    _emit(args, payload, _config(args))
    return 0


def cmd_meixner_bridge(args):
    obj = _load_json(args.params)
    theta, tau = (parse_scalar(obj.get(k, 0), args.mode) for k in ("theta", "tau"))
    R, V = _num(args, "R"), _num(args, "V")
    if args.slope is not None:
        slope = _num(args, "slope")
    elif args.zr is not None and args.zv is not None:
        slope = DeltaPair.from_values(R, V, _num(args, "zr"), _num(args, "zv")).slope
    else:
        raise UsageError("meixner-bridge needs --slope, or --zr and --zv")
    res = cond.meixner_bridge(theta, tau, R, V, slope)
    _emit(args, {"params": res.to_json()}, _config(args))
    return 0


def cmd_glue(args):
    verdict = cond.glue_classify(_params(args))
    payload = verdict.to_json()
    payload["case_number"] = GLUE_CASE_NUMBERS.get(verdict.case)
    _emit(args, payload, _config(args))
    return 0


def cmd_solve_t1i(args):
    obj = _load_json(args.params)
    target = [float(parse_scalar(obj.get(k, 0), "float")) for k in ("eta", "theta", "sigma", "tau")]
    sol = cond.solve_T1I(*target)
    fwd = sol.forward()
    goal = (*target, 1.0 - 2.0 * (target[2] * target[3]) ** 0.5)
    payload = {
        "meixner": {"theta_Z": sol.theta_Z, "tau_Z": sol.tau_Z, "span": sol.span, "slope": sol.slope},
        "scale": sol.scale,
        "forward_params": fwd.to_json(),
        "max_abs_error": max(abs(float(a) - b) for a, b in zip(fwd.astuple(), goal)),
    }
    _emit(args, payload, _config(args))
    return 0


def cmd_identities(args):
    results = run_identity_suite(args.trials, args.seed, args.mode)
    for r in results:
        print(r.summary())
    ok = all(r.passed for r in results)
    if args.out:
        payload = {"mode": args.mode, "seed": args.seed, "trials": args.trials, "results": [
            {"name": r.name, "passed": r.passed, "failures": r.failures, "redrawn": r.skipped} for r in results
        ], "verdict": "PASS" if ok else "FAIL"}
        atomic_write(args.out, json.dumps(payload, indent=2) + "\n")
        _echo_config(args.out, _config(args))
    return 0 if ok else 1


# --------------------------------------------------------------------------
# simulation commands


def _xi_law(text):
    if text is None:
        return None
    try:
        vals, probs = text.split(":")
        return procs.MixLaw(tuple(_floats(vals)), tuple(_floats(probs)))
    except ValueError:
        raise UsageError(f"--xi: expected 'v1,v2,...:p1,p2,...', got {text!r}") from None


def _descriptor(args) -> procs.ProcessDescriptor:
    if args.process_json:
        return procs.descriptor_from_json(_load_json(args.process_json))
    if not args.process:
        raise UsageError("--process or --process-json is required")
    name = args.process.lower()
    if name not in procs.PROCESSES:
        raise UsageError(f"unknown process {name!r}; known: {', '.join(sorted(procs.PROCESSES))}")
    fields = {"lam": args.lam, "alpha": args.alpha, "beta": args.beta, "c": args.c, "V": args.V, "v": args.v}
    fields["N"] = int(args.N) if args.N is not None else None
    fields["xi_law"] = _xi_law(args.xi)
    cls = procs.PROCESSES[name]
    accepted = set(getattr(cls, "__dataclass_fields__", {}))
    kwargs = {k: (float(v) if k not in ("N", "xi_law") else v) for k, v in fields.items() if v is not None and k in accepted}
    extra = [k for k, v in fields.items() if v is not None and k not in accepted]
    if extra:
        raise UsageError(f"{name} does not take {', '.join('--' + k for k in extra)}")
    return cls(**kwargs)


def _times(args):
    if not args.times:
        raise UsageError("--times is required")
    return _floats(args.times, flag="--times")


def cmd_simulate(args):
    d = _descriptor(args)
    if not args.out:
        raise UsageError("simulate needs --out")
    e = procs.sample_ensemble(d, _times(args), args.paths, args.seed)
    write_csv(e, args.out)
    _echo_config(args.out, _config(args, descriptor=d.to_json()))
    return 0


def _stu(args):
    if not args.stu:
        raise UsageError("--stu is required")
    return tuple(_floats(args.stu, 3, "--stu"))


def cmd_verify(args):
    if not args.ensemble:
        raise UsageError("verify needs --ensemble")
    e = read_csv(args.ensemble)
    p = QHParams.from_json(_load_json(args.params), "float")
    stu = _stu(args)
    report = compare_to_prediction(fit_conditional_variance(e, *stu), Prediction(p, stu), args.tol_sigmas)
    payload = report.to_json()
    payload["params"] = p.to_json()
    _emit(args, payload, _config(args))
    return 0 if report.verdict == "PASS" else 1


def cmd_pipeline(args):
    d = _descriptor(args)
    targets = _times(args)
    stu = _stu(args)
    if args.standardizer == "thm11":
        st = tr.standardize(d)
        transform, params = st.transform, st.params
    elif args.standardizer == "dirichlet" and isinstance(d, procs.DirichletBridge):
        transform, params = tr.DirichletTransform.build(d.c, d.V), tr.dirichlet_prediction(d.c, d.V)
    elif args.standardizer == "binomial" and isinstance(d, procs.BinomialBridge):
        transform, params = tr.BinomialTransform.build(d.N, d.V), tr.binomial_prediction(d.N, d.V)
    else:
        raise UsageError(f"standardizer {args.standardizer!r} does not apply to {d.kind}")
    src = procs.sample_ensemble(d, tr.source_grid(transform, targets), args.paths, args.seed)
    y = tr.transform_paths(src, transform, targets)
    report = compare_to_prediction(fit_conditional_variance(y, *stu), Prediction(params, stu), args.tol_sigmas)
    payload = report.to_json()
    payload["params"] = params.to_json()
    payload["transform"] = transform.to_json()
    if args.ensemble_out:
        write_csv(y, args.ensemble_out)
    _emit(args, payload, _config(args, descriptor=d.to_json()))
    return 0 if report.verdict == "PASS" else 1


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qh", description="Quadratic harness transformations and their Monte-Carlo checks.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, params=True):
        if params:
            p.add_argument("--params", help="JSON file or inline JSON")
        p.add_argument("--mode", choices=("float", "rational"), default="float")
        p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("transform", help="affine transform (--affine) or standardization of a spec")
    common(p)
    p.add_argument("--affine", help="a,b,c,d,m1,m2")
    p.add_argument("--cov-product", help="a,b,c,d with Cov = (a s + b)(c t + d), s < t")
    p.set_defaults(func=cmd_transform)

    for name, func, helptext in (
        ("bridge", cmd_bridge, "condition on X_R = zr and X_V = zv"),
        ("condition", cmd_condition, "condition on one endpoint"),
        ("meixner-bridge", cmd_meixner_bridge, "bridge of a Meixner process"),
    ):
        p = sub.add_parser(name, help=helptext)
        common(p)
        for flag in ("--R", "--V", "--zr", "--zv"):
            p.add_argument(flag)
        if name == "meixner-bridge":
            p.add_argument("--slope", help="(zv - zr)/(V - R)")
        p.set_defaults(func=func)

    p = sub.add_parser("glue", help="gluing classification")
    common(p)
    p.set_defaults(func=cmd_glue)

    p = sub.add_parser("solve-t1i", help="Meixner-bridge construction for gamma = 1 - 2 sqrt(sigma tau)")
    common(p)
    p.set_defaults(func=cmd_solve_t1i)

    p = sub.add_parser("identities", help="randomized identity suite")
    common(p, params=False)
    p.set_defaults(mode="rational")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_identities)

    def process_flags(p):
        p.add_argument("--process", help=", ".join(sorted(procs.PROCESSES)))
        p.add_argument("--process-json", help="descriptor JSON (file or inline)")
        for flag in ("--lam", "--alpha", "--beta", "--c", "--V", "--v"):
            p.add_argument(flag, type=float)
        p.add_argument("--N", type=int)
        p.add_argument("--xi", help="law of xi as 'v1,v2,...:p1,p2,...'")
        p.add_argument("--times", help="comma-separated grid")
        p.add_argument("--paths", type=int, default=1000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out")

    p = sub.add_parser("simulate", help="write a CSV ensemble")
    process_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="fit conditional moments of an ensemble and compare with params")
    p.add_argument("--ensemble", help="CSV written by simulate")
    p.add_argument("--params")
    p.add_argument("--stu", help="s,t,u")
    p.add_argument("--tol-sigmas", type=float, default=3.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pipeline", help="simulate, standardize and verify in one go")
    process_flags(p)
    p.add_argument("--stu", help="s,t,u on the standardized time axis")
    p.add_argument("--tol-sigmas", type=float, default=3.0)
    p.add_argument("--standardizer", choices=("thm11", "dirichlet", "binomial"), default="thm11")
    p.add_argument("--ensemble-out", help="also write the transformed ensemble")
    p.set_defaults(func=cmd_pipeline)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        ap.error(str(exc))  # exits 2
    except QHError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ZeroDivisionError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
