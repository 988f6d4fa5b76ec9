"""Command-line front end for the certified pipeline.

Orchestrates the stages (positive-sequence certification, recurrence
coefficients, embedding constants, quadrature self-test, fixed-point proof)
and records every certified quantity in a JSON certificate whose intervals
are outward-rounded decimal strings, so the artifact stays auditable and
re-checkable without this package's binary formats.

Exit codes: 0 success, 2 proof-failure verdict, 3 input error,
4 precision exhaustion.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import embed, gpcap, quad
from .freud import (CoeffVec, coeffs_from_enclosure, read_coeff_file,
                    write_coeff_file)
from .gpcap import ApproxSolution, GPParams
from .ivlmath import Ivl, PrecisionContext, ivl_from_decimal, ivl_to_decimal
from .painleve import PainleveParams, certify

CERT_VERSION = "1"
DIGITS = 40

EXIT_OK = 0
EXIT_VERDICT = 2
EXIT_INPUT = 3
EXIT_PRECISION = 4


class PipelineError(Exception):
    """A stage failed; carries the stage name for the failure marker."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    """Everything ``run_pipeline`` needs; one field per tunable knob."""

    stages: tuple
    kappa: Fraction = Fraction(4)
    c_minus: Fraction = Fraction(987, 1000)
    c_plus: Fraction = Fraction(1025, 1000)
    omega: Fraction = Fraction(8)
    bits: int = 512
    N1: int = 9_000_000
    n_split: int = 2187
    n_poincare: int = 1200
    quad_m: tuple = (4, 6)
    quad_nodes: int = 64
    n_gp: int = 2200
    seed: str = "bump"
    rule_bits: int = 12288
    use_cache: bool = True


# ---------------------------------------------------------------------------
# certificate serialization
# ---------------------------------------------------------------------------


def ivl_json(x: Ivl, digits: int = DIGITS) -> dict:
    """Interval as outward decimal strings (parsing can only widen)."""
    lo, hi = ivl_to_decimal(x, digits)
    return {"lo": lo, "hi": hi}


def ivl_unjson(d: dict, ctx: PrecisionContext) -> Ivl:
    return ivl_from_decimal(d["lo"], d["hi"], ctx)


def new_certificate(cfg: PipelineConfig) -> dict:
    return {
        "version": CERT_VERSION,
        "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "bits": cfg.bits,
        "params": {
            "kappa": str(cfg.kappa),
            "c_minus": str(cfg.c_minus),
            "c_plus": str(cfg.c_plus),
            "omega": str(cfg.omega),
        },
    }


def load_certificate(path) -> dict:
    with open(path) as f:
        return json.load(f)


def write_certificate(cert: dict, path=None) -> None:
    text = json.dumps(cert, indent=2, sort_keys=False)
    if path is None:
        print(text)
    else:
        with open(path, "w") as f:
            f.write(text + "\n")


def _open_certificate(cfg: PipelineConfig, path) -> dict:
    """Existing certificate at ``path`` (append semantics) or a fresh one."""
    if path and os.path.exists(path):
        try:
            return load_certificate(path)
        except (OSError, json.JSONDecodeError):
            pass
    return new_certificate(cfg)


# ---------------------------------------------------------------------------
# pipeline stages
# ---------------------------------------------------------------------------


def _painleve_params(cfg: PipelineConfig, m: int = 2) -> PainleveParams:
    return PainleveParams(cfg.kappa, cfg.c_minus, cfg.c_plus, m)


def _certified_coeffs(cfg: PipelineConfig, length: int):
    enc = certify(_painleve_params(cfg), cfg.N1, check_bits=cfg.bits,
                  use_cache=cfg.use_cache)
    return enc, coeffs_from_enclosure(enc, length, PrecisionContext(cfg.bits))


def stage_painleve(cert: dict, cfg: PipelineConfig) -> None:
    enc = certify(_painleve_params(cfg), cfg.N1, check_bits=cfg.bits,
                  use_cache=cfg.use_cache)
    cert["thresholds"] = {"N1": enc.N1, "N2": enc.N2, "N": enc.N}
    cert["b1"] = ivl_json(enc.b[1])
    cert["envelope"] = {"c_minus": str(cfg.c_minus),
                        "c_plus": str(cfg.c_plus)}


def stage_compact(cert: dict, cfg: PipelineConfig) -> None:
    enc, coeffs = _certified_coeffs(cfg, cfg.n_split + 8)
    C_alpha, theta = embed.compactness_constants(coeffs, enc.N, cfg.c_plus)
    block = {"C_alpha": ivl_json(C_alpha), "theta": ivl_json(theta)}
    cert.setdefault("constants", {}).update(block)


def stage_constants(cert: dict, cfg: PipelineConfig) -> None:
    enc, coeffs = _certified_coeffs(cfg, cfg.n_split + 8)
    C_alpha, theta = embed.compactness_constants(coeffs, enc.N, cfg.c_plus)
    C12, C22, C = embed.tail_constants(coeffs, cfg.n_split, C_alpha, theta,
                                       "even")
    flux = embed.flux_bound(coeffs, cfg.n_split, cfg.c_minus, cfg.c_plus,
                            theta, C_alpha)
    cert.setdefault("constants", {}).update({
        "C_alpha": ivl_json(C_alpha), "theta": ivl_json(theta),
        "C12": ivl_json(C12), "C22": ivl_json(C22), "C": ivl_json(C),
        "c": ivl_json(flux.c), "Z": ivl_json(flux.Z),
        "n_split": cfg.n_split,
    })


def stage_poincare(cert: dict, cfg: PipelineConfig) -> None:
    _, coeffs = _certified_coeffs(cfg, cfg.n_poincare + 8)
    res = embed.poincare_enclosure(coeffs, cfg.n_poincare)
    cert["poincare"] = {"n": res.n, "lower": ivl_json(res.lower),
                        "upper": ivl_json(res.upper)}
    cert.setdefault("constants", {})["C_P"] = ivl_json(res.upper)


def stage_quad(cert: dict, cfg: PipelineConfig) -> None:
    block = {}
    for m in cfg.quad_m:
        rule = quad.freud_gauss_rule(m, cfg.kappa, cfg.quad_nodes,
                                     PrecisionContext(max(cfg.bits, 256)),
                                     c_minus=cfg.c_minus, c_plus=cfg.c_plus,
                                     use_cache=cfg.use_cache)
        defect = quad.orthonormality_defect(rule, min(30, cfg.quad_nodes - 2))
        block[f"m{m}"] = {"N_nodes": cfg.quad_nodes, "bits": rule.bits,
                          "max_defect": float(defect)}
    cert["quadrature"] = block


def gp_certificate_block(sol: ApproxSolution, consts, params: GPParams,
                         *, positivity: bool | None = None) -> tuple[dict, bool]:
    """Run the fixed-point bounds for one approximate solution and return
    the certificate block plus the radii verdict."""
    An = gpcap.build_An(sol, consts)
    Y = gpcap.bound_Y(sol, An, consts)
    Z11, Z12, Z21, Z22, Z1 = gpcap.bound_Z1(sol, An, consts)
    An_norm = gpcap.An_norm_bound(An, consts.ctx)
    Z2, Z3 = gpcap.bound_Z2_Z3(sol, An_norm, consts)
    rr = gpcap.radii(Y, Z1, Z2, Z3)
    if positivity is None and rr.success:
        positivity = gpcap.positivity_check(sol, rr.delta_lo, consts.flux,
                                            params, coeffs=consts.coeffs)
    h1R = gpcap.h1R_error(rr.delta_lo, consts.flux) if rr.success else None
    block = {
        "n": sol.n, "n_u": consts.n_u,
        "Y": ivl_json(Y), "Z11": ivl_json(Z11), "Z12": ivl_json(Z12),
        "Z21": ivl_json(Z21), "Z22": ivl_json(Z22), "Z1": ivl_json(Z1),
        "Z2": ivl_json(Z2), "Z3": ivl_json(Z3),
        "delta_lo": ivl_json(rr.delta_lo), "delta_hi": ivl_json(rr.delta_hi),
        "success": rr.success,
        "positivity": bool(positivity) if positivity is not None else False,
    }
    if h1R is not None:
        block["h1R_bound"] = ivl_json(h1R)
    return block, rr.success


def stage_gp(cert: dict, cfg: PipelineConfig) -> bool:
    params = GPParams.standard(cfg.kappa, cfg.omega)
    sol = gpcap.newton_solve(params, cfg.n_gp,
                             gpcap.seed_vector(params, cfg.n_gp, cfg.seed))
    sol, n_u = gpcap.truncate_solution(sol)
    consts = gpcap.proof_constants(params, cfg.n_gp, n_u, bits=cfg.bits,
                                   work_bits4=cfg.rule_bits,
                                   work_bits6=cfg.rule_bits,
                                   use_cache=cfg.use_cache)
    block, ok = gp_certificate_block(sol, consts, params)
    block["seed"] = cfg.seed
    cert["gp"] = block
    cert.setdefault("constants", {})["C_P"] = ivl_json(consts.C_P)
    return ok


_STAGES = {
    "painleve": stage_painleve,
    "compact": stage_compact,
    "constants": stage_constants,
    "poincare": stage_poincare,
    "quad": stage_quad,
    "gp": stage_gp,
}


def run_pipeline(config: PipelineConfig, out=None) -> dict:
    """Execute the requested stages in order, appending each block to the
    certificate; the partial certificate is written with a failure marker
    before the first uncertifiable stage aborts the run."""
    if not config.stages:
        raise ValueError("no stages requested")
    unknown = [s for s in config.stages if s not in _STAGES]
    if unknown:
        raise ValueError(f"unknown stages: {unknown}")
    cert = _open_certificate(config, out)
    cert["bits"] = config.bits
    verdict_ok = True
    for stage in config.stages:
        try:
            result = _STAGES[stage](cert, config)
        except Exception as exc:
            cert["failure"] = {"stage": stage, "error": str(exc)}
            write_certificate(cert, out)
            raise PipelineError(stage, exc) from exc
        if result is False:
            verdict_ok = False
    cert["verdict"] = "success" if verdict_ok else "proof-failure"
    write_certificate(cert, out)
    return cert


# ---------------------------------------------------------------------------
# certificate verification
# ---------------------------------------------------------------------------


def _frac(s: str) -> Fraction:
    return Fraction(s)


def _check_interval(name: str, d, problems: list) -> tuple | None:
    try:
        lo, hi = _frac(d["lo"]), _frac(d["hi"])
    except (KeyError, TypeError, ValueError):
        problems.append(f"{name} malformed")
        return None
    if lo > hi:
        problems.append(f"{name} lo <= hi")
        return None
    return lo, hi


def check_certificate(cert: dict) -> tuple[bool, str | None]:
    """Recheck every closed-form identity and inequality stored in the
    certificate with exact rational arithmetic; returns (ok, culprit)."""
    problems: list[str] = []
    consts = cert.get("constants", {})
    vals = {}
    for name, d in consts.items():
        if isinstance(d, dict):
            got = _check_interval(f"constants.{name}", d, problems)
            if got:
                vals[name] = got
    if "theta" in vals and vals["theta"][1] >= 1:
        problems.append("theta < 1")
    if "C_alpha" in vals and vals["C_alpha"][0] <= 0:
        problems.append("C_alpha > 0")
    if all(k in vals for k in ("C", "C12", "C22")):
        # C is defined as sqrt(C12^2 + C22^2); its upper end cannot sit
        # below the lower ends of the parts.
        if vals["C"][1] ** 2 < vals["C12"][0] ** 2 + vals["C22"][0] ** 2:
            problems.append("C >= sqrt(C12^2 + C22^2)")
    if "c" in vals and vals["c"][0] <= 0:
        problems.append("c > 0")
    th = cert.get("thresholds")
    if th is not None:
        if not (0 < th["N"] <= th["N2"] <= th["N1"]):
            problems.append("N <= N2 <= N1")
    if "b1" in cert:
        b1 = _check_interval("b1", cert["b1"], problems)
        if b1 and b1[0] <= 0:
            problems.append("b1 > 0")
    po = cert.get("poincare")
    if po is not None:
        lo = _check_interval("poincare.lower", po["lower"], problems)
        hi = _check_interval("poincare.upper", po["upper"], problems)
        if lo and hi and lo[0] > hi[1]:
            problems.append("poincare lower <= upper")
    gp = cert.get("gp")
    if gp is not None:
        g = {}
        for name in ("Y", "Z11", "Z12", "Z21", "Z22", "Z1", "Z2", "Z3",
                     "delta_lo", "delta_hi"):
            if name in gp:
                got = _check_interval(f"gp.{name}", gp[name], problems)
                if got:
                    g[name] = got
        if gp.get("success"):
            if "Z1" in g and g["Z1"][1] >= 1:
                problems.append("Z1 < 1")
            if "delta_lo" in g and "delta_hi" in g \
                    and g["delta_lo"][0] > g["delta_hi"][1]:
                problems.append("delta_lo <= delta_hi")
            if all(k in g for k in ("Y", "Z1", "Z2", "Z3", "delta_lo")):
                d = g["delta_lo"][1]
                Y, Z1 = g["Y"][1], g["Z1"][1]
                Z2, Z3 = g["Z2"][1], g["Z3"][1]
                Q = Y - d * (1 - Z1) + Z2 * d * d / 2 + Z3 * d ** 3 / 6
                R = Z1 - 1 + Z2 * d + Z3 * d * d / 2
                if Q >= 0:
                    problems.append("Q(delta_lo) < 0")
                if R >= 0:
                    problems.append("R(delta_lo) < 0")
    if "failure" in cert:
        problems.append(f"failure marker at stage {cert['failure'].get('stage')}")
    if problems:
        return False, problems[0]
    return True, None


def verify_certificate(path) -> bool:
    """True iff the certificate at ``path`` passes every recheck."""
    return check_certificate(load_certificate(path))[0]


# ---------------------------------------------------------------------------
# profile export
# ---------------------------------------------------------------------------


def export_profile(sol: ApproxSolution, coeffs, a: Fraction, b: Fraction,
                   step: Fraction, path, *, bits: int = 512) -> int:
    """CSV of (x, profile(x)) midpoints on the grid a, a+step, ..., b."""
    if step <= 0 or b < a:
        raise ValueError("need a <= b and step > 0")
    ctx = PrecisionContext(bits)
    up = gpcap._profile_up(sol, coeffs, ctx)
    rows = 0
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x", "phi"])
        x = Fraction(a)
        while x <= b:
            val = gpcap._profile_value(up, coeffs, ctx.ivl(x))
            w.writerow([float(x), float(val.mid())])
            rows += 1
            x += step
    return rows


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    p = _Parser(prog="freud-caps",
                description="Certified spectral pipeline and proof "
                            "certificates for the quartic weight family.")
    p.add_argument("--bits", type=int, default=512,
                   help="verification precision in bits (default 512)")
    p.add_argument("--threads", type=int, default=None,
                   help="cap the linear-algebra thread count")
    p.add_argument("--cache-dir", default=None,
                   help="directory for cached enclosures and rules")
    p.add_argument("--out", default=None,
                   help="output path (certificate JSON or data file)")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("painleve", help="certify the positive recurrence "
                                        "sequence and its thresholds")
    q.add_argument("--kappa", default="4")
    q.add_argument("--cminus", default="987/1000")
    q.add_argument("--cplus", default="1025/1000")
    q.add_argument("--n1", type=int, default=9_000_000)

    q = sub.add_parser("coeffs", help="write the certified recurrence "
                                      "coefficients a_n to a file")
    q.add_argument("--kappa", default="4")
    q.add_argument("--length", type=int, required=True)

    q = sub.add_parser("constants", help="tail, flux and compactness "
                                         "constants at a split index")
    q.add_argument("--kappa", default="4")
    q.add_argument("--nsplit", type=int, default=2187)

    q = sub.add_parser("poincare", help="finite-section Poincare enclosure")
    q.add_argument("--kappa", default="4")
    q.add_argument("--n", type=int, required=True)

    q = sub.add_parser("compact", help="closed-form compactness constants")
    q.add_argument("--kappa", default="4")
    q.add_argument("--nsplit", type=int, default=2187)

    q = sub.add_parser("quad-selftest", help="orthonormality defect of a "
                                             "certified Gauss rule")
    q.add_argument("--m", type=int, choices=(4, 6), required=True)
    q.add_argument("--kappa", default="4")
    q.add_argument("--nodes", type=int, default=64)

    q = sub.add_parser("gp-solve", help="Newton solve for an approximate "
                                        "stationary profile")
    q.add_argument("--kappa", default="4")
    q.add_argument("--omega", default="8")
    q.add_argument("--n", type=int, default=2200)
    q.add_argument("--seed", choices=("bump", "signed"), required=True)

    q = sub.add_parser("gp-prove", help="certified existence proof around "
                                        "an approximate solution file")
    q.add_argument("--ubar", required=True)
    q.add_argument("--kappa", default="4")
    q.add_argument("--omega", default="8")
    q.add_argument("--rule-bits", type=int, default=12288)
    q.add_argument("--export-profile", nargs=3, metavar=("A", "B", "STEP"),
                   default=None)
    q.add_argument("--profile-out", default="profile.csv")

    q = sub.add_parser("verify", help="recheck a certificate's stored "
                                      "identities and inequalities")
    q.add_argument("path")
    return p


def _config_from_args(args, stages: tuple) -> PipelineConfig:
    cfg = PipelineConfig(stages=stages, bits=args.bits)
    if getattr(args, "kappa", None) is not None:
        cfg.kappa = Fraction(args.kappa)
    if getattr(args, "cminus", None) is not None:
        cfg.c_minus = Fraction(args.cminus)
    if getattr(args, "cplus", None) is not None:
        cfg.c_plus = Fraction(args.cplus)
    if getattr(args, "omega", None) is not None:
        cfg.omega = Fraction(args.omega)
    if getattr(args, "n1", None) is not None:
        cfg.N1 = args.n1
    if getattr(args, "nsplit", None) is not None:
        cfg.n_split = args.nsplit
    if getattr(args, "n", None) is not None:
        cfg.n_poincare = args.n
        cfg.n_gp = args.n
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "nodes", None) is not None:
        cfg.quad_nodes = args.nodes
    if getattr(args, "m", None) is not None:
        cfg.quad_m = (args.m,)
    if getattr(args, "rule_bits", None) is not None:
        cfg.rule_bits = args.rule_bits
    return cfg


def _cmd_coeffs(args) -> int:
    cfg = _config_from_args(args, ("painleve",))
    if args.out is None:
        raise ValueError("coeffs requires --out")
    if args.length < 1:
        raise ValueError("length must be positive")
    _, coeffs = _certified_coeffs(cfg, args.length)
    write_coeff_file(args.out, coeffs.a[: args.length + 1], digits=DIGITS)
    print(f"wrote {args.length + 1} coefficient records to {args.out}")
    return EXIT_OK


def _cmd_gp_solve(args) -> int:
    cfg = _config_from_args(args, ("gp",))
    if args.out is None:
        raise ValueError("gp-solve requires --out")
    params = GPParams.standard(cfg.kappa, cfg.omega)
    sol = gpcap.newton_solve(params, cfg.n_gp,
                             gpcap.seed_vector(params, cfg.n_gp, cfg.seed))
    sol, n_u = gpcap.truncate_solution(sol)
    ctx = PrecisionContext(cfg.bits)
    write_coeff_file(args.out,
                     [ctx.ivl(Fraction(float(v))) for v in sol.ubar.entries],
                     digits=25)
    print(f"wrote n={sol.n} solution (support n_u={n_u}, residual "
          f"{float(sol.residual_norm.hi):.2e}) to {args.out}")
    return EXIT_OK


def _cmd_gp_prove(args) -> int:
    cfg = _config_from_args(args, ("gp",))
    ctx = PrecisionContext(cfg.bits)
    entries = read_coeff_file(args.ubar, ctx)
    n = len(entries) - 1
    if n < 2 or n % 2:
        raise ValueError("solution file must hold n+1 records with n even")
    params = GPParams.standard(cfg.kappa, cfg.omega)
    mids = [float(x.mid()) for x in entries]
    sol = ApproxSolution(CoeffVec("Q", "even", mids), n,
                         _residual_ivl(params, n, mids, cfg.bits))
    sol, n_u = gpcap.truncate_solution(sol)
    consts = gpcap.proof_constants(params, n, n_u, bits=cfg.bits,
                                   work_bits4=cfg.rule_bits,
                                   work_bits6=cfg.rule_bits)
    block, ok = gp_certificate_block(sol, consts, params)
    cert = _open_certificate(cfg, args.out)
    cert["gp"] = block
    cert.setdefault("constants", {})["C_P"] = ivl_json(consts.C_P)
    cert["verdict"] = "success" if ok else "proof-failure"
    write_certificate(cert, args.out)
    if args.export_profile:
        a, b, step = (Fraction(s) for s in args.export_profile)
        rows = export_profile(sol, consts.coeffs, a, b, step,
                              args.profile_out, bits=cfg.bits)
        print(f"wrote {rows} profile samples to {args.profile_out}",
              file=sys.stderr)
    return EXIT_OK if ok else EXIT_VERDICT


def _residual_ivl(params: GPParams, n: int, mids, bits: int) -> Ivl:
    sp = gpcap._NewtonSpace(params, n)
    uq = np.array(mids[0::2], dtype=np.float64)
    r, _, _ = sp.residual(uq)
    ctx = PrecisionContext(bits)
    return ctx.ivl(0).hull(ctx.ivl(Fraction(float(np.linalg.norm(r)))))


def _cmd_verify(args) -> int:
    cert = load_certificate(args.path)
    ok, culprit = check_certificate(cert)
    if ok:
        print("certificate OK")
        return EXIT_OK
    print(f"certificate FAILED: {culprit}")
    return EXIT_VERDICT


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.cache_dir:
        os.environ["FREUDCAPS_CACHE_DIR"] = args.cache_dir
    if args.threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ.setdefault(var, str(args.threads))
    try:
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "coeffs":
            return _cmd_coeffs(args)
        if args.command == "gp-solve":
            return _cmd_gp_solve(args)
        if args.command == "gp-prove":
            return _cmd_gp_prove(args)
        stage = {"painleve": "painleve", "constants": "constants",
                 "poincare": "poincare", "compact": "compact",
                 "quad-selftest": "quad"}[args.command]
        cfg = _config_from_args(args, (stage,))
        cert = run_pipeline(cfg, out=args.out)
        if args.out:
            print(f"certificate written to {args.out}")
        return EXIT_OK if cert.get("verdict") == "success" else EXIT_VERDICT
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PipelineError as exc:
        if isinstance(exc.cause, ArithmeticError):
            print(f"precision exhausted: {exc}", file=sys.stderr)
            return EXIT_PRECISION
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ArithmeticError as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION


if __name__ == "__main__":
    sys.exit(main())
