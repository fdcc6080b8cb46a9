"""Command-line interface.

Every subcommand reads JSON files, prints a JSON report on stdout and uses
the exit codes 0 (feasible / valid), 1 (negative verdict), 2 (malformed
input) and 3 (hypothesis violation).  Diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import logging
import sys
from pathlib import Path

import numpy as np

from . import config, io
from .convert import (BlochVector, mixed_to_pure_convertible, pure_conversion_channel,
                      pure_convertible, qubit_ico_convertible)
from .distill import (DistillationParams, choose_alpha, distill, phase1_certificate,
                      phase1_instance, theorem4_transform)
from .errors import (CohKitError, ConditionsNotMetError, HypothesisError,
                     InternalInconsistencyError, NecessaryConditionError, NotMajorizedError,
                     ValidationError)
from .linalg import trace_distance
from .majorization import birkhoff_decompose, d_majorizes, majorizes, prefix_sums, transfer_matrix
from .preorder import brute_force_feasible, search_certificate, verify_certificate
from .sio import SIO, classify_channel

log = logging.getLogger("cohkit")

OK, NEGATIVE, MALFORMED, HYPOTHESIS = 0, 1, 2, 3

# distillation reports pass when their residuals stay below these
DISTILL_TRACE_TOL = 1e-7
DISTILL_COMPLETENESS_TOL = 1e-8


def _emit(report) -> None:
    sys.stdout.write(io.dumps(report))


def _write(path: str | Path, obj) -> None:
    Path(path).write_text(io.dumps(obj), encoding="utf-8")


def cmd_majorize(args) -> int:
    x = io.probs_from_json(io.load_json(args.x))
    y = io.probs_from_json(io.load_json(args.y))
    if x.size != y.size:
        raise ValidationError(f"dimension mismatch: {x.size} vs {y.size}")
    ok = majorizes(x, y)
    _emit({"majorized": ok, "prefix_sums": {"x": prefix_sums(x), "y": prefix_sums(y)}})
    return OK if ok else NEGATIVE


def cmd_transfer(args) -> int:
    x = io.probs_from_json(io.load_json(args.x))
    y = io.probs_from_json(io.load_json(args.y))
    D = transfer_matrix(x, y)
    _emit({"matrix": io.matrix_to_json(D), "residual": float(np.abs(D @ y - x).max())})
    return OK


def cmd_birkhoff(args) -> int:
    D = io.matrix_from_json(io.load_json(args.matrix))
    dec = birkhoff_decompose(D)
    out = io.birkhoff_to_json(dec)
    out["residual"] = float(np.abs(dec.matrix() - D).max())
    _emit(out)
    return OK


def cmd_dmaj(args) -> int:
    vecs = [io.probs_from_json(io.load_json(f), validate=False) for f in (args.p, args.q, args.p2, args.q2)]
    ok, D = d_majorizes(*vecs, return_witness=True)
    _emit({"d_majorized": ok, "witness": None if D is None else io.matrix_to_json(D)})
    return OK if ok else NEGATIVE


def cmd_verify_channel(args) -> int:
    ch = io.channel_from_json(io.load_json(args.channel), check=False)
    r = ch.completeness_residual()
    if r >= config.tol():
        raise ValidationError(f"Kraus operators are not complete (residual {r:.3g})")
    cls = classify_channel(ch)
    _emit({"class": cls, "completeness_residual": r})
    return OK if cls == SIO else NEGATIVE


def cmd_pure_transform(args) -> int:
    psi = io.state_from_json(io.load_json(args.source))
    phi = io.state_from_json(io.load_json(args.target))
    ok = pure_convertible(psi, phi)
    report = {"convertible": ok, "channel": None}
    if ok:
        report["channel"] = io.channel_to_json(pure_conversion_channel(psi, phi))
    _emit(report)
    return OK if ok else NEGATIVE


def cmd_pair_check(args) -> int:
    inst = io.instance_from_json(io.load_json(args.instance))
    report: dict = {}
    code = NEGATIVE
    if args.certificate:
        cert = io.certificate_from_json(io.load_json(args.certificate))
        rep = verify_certificate(inst, cert)
        report.update(mode="verify", **rep.as_dict())
        code = OK if rep else NEGATIVE
    else:
        try:
            cert = search_certificate(inst, budget=args.budget)
        except HypothesisError as exc:
            # outside the certificate theory only the numerical oracle applies
            if not args.brute_force:
                raise
            cert = None
            report["hypothesis"] = str(exc)
        report.update(mode="search", found=cert is not None)
        if cert is not None:
            code = OK
            if args.emit_cert == "-":
                report["certificate"] = io.certificate_to_json(cert)
            elif args.emit_cert:
                _write(args.emit_cert, io.certificate_to_json(cert))
        else:
            report["message"] = "no certificate found (not a proof of infeasibility)"
    if args.brute_force:
        feasible, _ = brute_force_feasible(inst, args.max_kraus, seed=args.seed)
        report["brute_force"] = feasible
        if feasible and code != OK and not args.certificate:
            code = OK
    _emit(report)
    return code


def _distill_one(payload):
    params, alpha, tol, zero = payload
    with config.override(tol=tol, zero=zero):
        res = distill(params, alpha)
        ok = (res.residuals["trace_distance"] < DISTILL_TRACE_TOL
              and res.residuals["completeness"] < DISTILL_COMPLETENESS_TOL)
        report = {
            "params": io.params_to_json(params, alpha),
            "weights": {"incoherent": res.mixture.incoherent,
                        "coherent": 1.0 - res.mixture.incoherent,
                        "p": list(res.level_weights),
                        "p_sum": float(sum(res.level_weights))},
            "incoherent_label": res.incoherent_label,
            "channel": io.channel_to_json(res.channel),
            "output": io.density_to_json(res.output),
            "residuals": res.residuals,
            "ok": ok,
        }
    return report


def _parse_sweep(spec: str):
    try:
        name, rng = spec.split("=", 1)
        lo, hi, step = (float(v) for v in rng.split(":"))
    except ValueError as exc:
        raise ValidationError(f"sweep must look like name=start:stop:step, got {spec!r}") from exc
    if name not in ("gamma", "lambda1", "c"):
        raise ValidationError(f"cannot sweep {name!r}; choose gamma, lambda1 or c")
    if step <= 0 or hi < lo:
        raise ValidationError("sweep needs step > 0 and stop >= start")
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return name, [lo + k * step for k in range(n)]


def cmd_distill(args) -> int:
    params, alpha = io.params_from_json(io.load_json(args.params))
    if args.sweep:
        name, values = _parse_sweep(args.sweep)
        grid = []
        for v in values:
            fields = dict(d=params.d, gamma=params.gamma, lambda1=params.lambda1, c=params.c,
                          phi=params.phi, psi=params.psi)
            fields[name] = v
            grid.append(DistillationParams(**fields))
    else:
        grid = [params]
    payloads = [(p, alpha, config.tol(), config.zero_tol()) for p in grid]
    if args.jobs > 1 and len(payloads) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_distill_one, payloads))
    else:
        reports = [_distill_one(p) for p in payloads]
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for k, rep in enumerate(reports):
            _write(out / f"distill_{k:04d}.json", rep)
    if args.emit_instance or args.emit_cert:
        a = choose_alpha(params, alpha)
        if args.emit_instance:
            _write(args.emit_instance, io.instance_to_json(phase1_instance(params, a)))
        if args.emit_cert:
            _write(args.emit_cert, io.certificate_to_json(phase1_certificate(params, a)))
    _emit(reports if args.sweep else reports[0])
    return OK if all(r["ok"] for r in reports) else NEGATIVE


def cmd_theorem4(args) -> int:
    obj = io.load_json(args.input)
    try:
        kw = {k: io.state_from_json(obj[k]) for k in ("phi", "psi", "alpha", "beta", "tau")}
        kw.update(d11=io.matrix_from_json(obj["d11"]), d21=io.matrix_from_json(obj["d21"]),
                  c=float(obj["c"]), p1=float(obj["p1"]))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad input: {exc}") from exc
    rho_in, channel, rho_out = theorem4_transform(**kw)
    r = kw["alpha"].size
    target = np.zeros_like(rho_out)
    a, b = kw["alpha"], kw["beta"]
    target[:r, :r] = kw["p1"] * np.outer(a, a.conj()) + (1 - kw["p1"]) * np.outer(b, b.conj())
    off = np.abs(rho_out.copy())
    off[:r, :r] = 0
    residuals = {"trace_distance": trace_distance(rho_out, target),
                 "off_corner": float(off.max()),
                 "completeness": channel.completeness_residual()}
    ok = residuals["trace_distance"] < 1e-7 and residuals["off_corner"] < 1e-9
    _emit({"input": io.density_to_json(rho_in), "channel": io.channel_to_json(channel),
           "output": io.density_to_json(rho_out), "residuals": residuals, "ok": ok})
    return OK if ok else NEGATIVE


def _bloch(text: str) -> BlochVector:
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"Bloch vector must be three comma-separated numbers: {text!r}") from exc
    if len(parts) != 3:
        raise ValidationError(f"Bloch vector must have three components: {text!r}")
    return BlochVector(*parts)


def cmd_qubit_ico(args) -> int:
    ok = qubit_ico_convertible(_bloch(args.r), _bloch(args.s))
    _emit({"convertible": ok})
    return OK if ok else NEGATIVE


def cmd_mixed_to_pure(args) -> int:
    rho = io.density_from_json(io.load_json(args.rho))
    phi = io.state_from_json(io.load_json(args.target))
    ok = mixed_to_pure_convertible(rho, phi, partition=args.partition)
    _emit({"convertible": ok, "partition": args.partition})
    return OK if ok else NEGATIVE


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    # subcommands repeat the global flags with suppressed defaults so they may
    # appear on either side of the subcommand name
    def dflt(v):
        return argparse.SUPPRESS if suppress else v

    p.add_argument("--tol", type=_positive, default=dflt(None), help="equality tolerance (default 1e-9)")
    p.add_argument("--zero-threshold", type=_positive, default=dflt(None),
                   help="modulus treated as zero (default 1e-10)")
    p.add_argument("--seed", type=int, default=dflt(0), help="seed for randomized searches")
    p.add_argument("--jobs", type=int, default=dflt(1), help="worker processes for sweeps")
    p.add_argument("-v", "--verbose", action="store_true", default=dflt(False))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cohkit", description="Coherence transformations under strictly incoherent operations.")
    _global_flags(p, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("majorize", parents=[common], help="is x majorized by y?")
    s.add_argument("x")
    s.add_argument("y")
    s.set_defaults(func=cmd_majorize)

    s = sub.add_parser("transfer", parents=[common], help="doubly stochastic D with D y = x")
    s.add_argument("x")
    s.add_argument("y")
    s.set_defaults(func=cmd_transfer)

    s = sub.add_parser("birkhoff", parents=[common], help="Birkhoff decomposition of a doubly stochastic matrix")
    s.add_argument("matrix")
    s.set_defaults(func=cmd_birkhoff)

    s = sub.add_parser("dmaj", parents=[common], help="column-stochastic D with D p = p2 and D q = q2?")
    for name in ("p", "q", "p2", "q2"):
        s.add_argument(name)
    s.set_defaults(func=cmd_dmaj)

    s = sub.add_parser("verify-channel", parents=[common], help="classify a Kraus channel")
    s.add_argument("channel")
    s.set_defaults(func=cmd_verify_channel)

    s = sub.add_parser("pure-transform", parents=[common], help="pure-to-pure convertibility and channel")
    s.add_argument("source")
    s.add_argument("target")
    s.set_defaults(func=cmd_pure_transform)

    s = sub.add_parser("pair-check", parents=[common], help="verify or search a pair transformation")
    s.add_argument("instance")
    s.add_argument("certificate", nargs="?")
    s.add_argument("--budget", type=int, default=64, help="ratio candidates to try")
    s.add_argument("--brute-force", action="store_true", help="also run the numerical oracle (dim <= 3)")
    s.add_argument("--max-kraus", type=int, default=None)
    s.add_argument("--emit-cert", nargs="?", const="-", default=None,
                   help="write a found certificate to this path (or stdout without a path)")
    s.set_defaults(func=cmd_pair_check)

    s = sub.add_parser("distill", parents=[common], help="two-stage distillation of a rank-two state")
    s.add_argument("params")
    s.add_argument("--sweep", help="name=start:stop:step over gamma, lambda1 or c")
    s.add_argument("--out-dir", help="write one report file per grid point")
    s.add_argument("--emit-instance", help="write the stage-one pair instance here")
    s.add_argument("--emit-cert", help="write the stage-one certificate here")
    s.set_defaults(func=cmd_distill)

    s = sub.add_parser("theorem4", parents=[common], help="rank-two mixed-state conversion")
    s.add_argument("input")
    s.set_defaults(func=cmd_theorem4)

    s = sub.add_parser("qubit-ico", parents=[common], help="qubit ICO test on Bloch vectors rx,ry,rz")
    s.add_argument("r")
    s.add_argument("s")
    s.set_defaults(func=cmd_qubit_ico)

    s = sub.add_parser("mixed-to-pure", parents=[common], help="can a mixed state reach a pure target?")
    s.add_argument("rho")
    s.add_argument("target")
    s.add_argument("--partition", choices=("support", "search"), default="support")
    s.set_defaults(func=cmd_mixed_to_pure)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, which matches "malformed input"
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    overrides = {}
    if args.tol is not None:
        overrides["tol"] = args.tol
    if args.zero_threshold is not None:
        overrides["zero"] = args.zero_threshold
    try:
        with config.override(**overrides):
            return args.func(args)
    except HypothesisError as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        return HYPOTHESIS
    except (NotMajorizedError, NecessaryConditionError, ConditionsNotMetError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        _emit({"feasible": False, "reason": str(exc)})
        return NEGATIVE
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return MALFORMED
    except InternalInconsistencyError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return NEGATIVE
    except CohKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return MALFORMED


if __name__ == "__main__":
    sys.exit(main())
