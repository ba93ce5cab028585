"""Batch experiment runner: ``veech <verb> <subcommand> [options]``.

Every command writes CSV/JSON (and optionally SVG) into ``--out`` and
returns a nonzero exit status when a check it performs fails.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import acceptance, words
from .acceptance import Check, SuiteConfig
from .cocycle import (constant_cocycle, exponent_scan, finite_lyap,
                      fekete_violations, identity_cocycle, sup_and_mean_norm_growth,
                      walters_B)
from .cone import NoConvergenceError, OnYError, invariant_direction
from .output import svg_line_plot, write_csv, write_json
from .perturb import (Perturbation, check_schedule, default_schedule, key_estimate_sweep,
                      r_decay_sweep)
from .subshift import (OutOfWindowError, explicit_window, inside_elementary,
                       point_at_radius)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

CONFIG_HELP = """\
configuration file (--config PATH), flat key = value pairs in sections:

  [run]
    seed = 12345            random seed; fixed seed gives byte-identical CSV/JSON
    K = 6                   host level for language checks and ratios
    out = out               output directory (created if missing)
    schedule = factorial    factorial | greedy
    m_prefix =              comma list overriding the first m_k (default m_k = 2^k)
    scale = 1.0             Walters cocycle scale s
  [tolerances]
    bundle_tol = 1e-12      target cone diameter for invariant directions
    z_lip_slack = 1e-12     float slack in the Z Lipschitz check
  [samples]
    walters_n = 100000      walters_offsets = 4     cone_samples = 10000
    z_samples = 1000        mk_samples = 100        pipeline_points = 50
    pipeline_n = 500        decay_per_shell = 40    key_samples = 10
    band_orbits = 20        band_n = 2000
  [perturb]
    depth_max = 1000        backward depth limit for invariant directions
    key_shell = 5           shell used by the key-estimate criterion

command-line flags override the file; tolerances must be nonnegative.
"""


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    seed: int = 12345
    K: int = 6
    out: Path = Path("out")
    schedule: str = "factorial"
    m_prefix: tuple = ()
    scale: float = 1.0
    bundle_tol: float = 1e-12
    z_lip_slack: float = 1e-12
    depth_max: int = 1000
    key_shell: int = 5
    samples: dict = field(default_factory=dict)

    @property
    def params(self) -> words.WordParams:
        if not self.m_prefix:
            return words.DEFAULT_PARAMS
        return words.WordParams(prefix=tuple(self.m_prefix))

    def suite(self) -> SuiteConfig:
        return SuiteConfig(seed=self.seed, K=self.K, params=self.params,
                           schedule_name=self.schedule, depth_max=self.depth_max,
                           tol=self.bundle_tol, z_lip_slack=self.z_lip_slack,
                           key_shell=self.key_shell, **self.samples)

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])


_SAMPLE_KEYS = ("walters_n", "walters_offsets", "cone_samples", "z_samples", "mk_samples",
                "pipeline_points", "pipeline_n", "decay_per_shell", "key_samples",
                "band_orbits", "band_n")
_TOL_KEYS = ("bundle_tol", "z_lip_slack")


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        if not cp.read(args.config):
            raise ConfigError(f"cannot read config file {args.config}")
        try:
            run = cp["run"] if cp.has_section("run") else {}
            cfg.seed = int(run.get("seed", cfg.seed))
            cfg.K = int(run.get("K", cfg.K))
            cfg.out = Path(run.get("out", str(cfg.out)))
            cfg.schedule = run.get("schedule", cfg.schedule)
            prefix = run.get("m_prefix", "").strip()
            cfg.m_prefix = tuple(int(v) for v in prefix.split(",")) if prefix else ()
            cfg.scale = float(run.get("scale", cfg.scale))
            if cp.has_section("tolerances"):
                for key in _TOL_KEYS:
                    if key in cp["tolerances"]:
                        setattr(cfg, key, float(cp["tolerances"][key]))
                unknown = set(cp["tolerances"]) - set(_TOL_KEYS)
                if unknown:
                    raise ConfigError(f"unknown tolerance keys: {sorted(unknown)}")
            if cp.has_section("samples"):
                for key, value in cp["samples"].items():
                    if key not in _SAMPLE_KEYS:
                        raise ConfigError(f"unknown sample key {key!r}")
                    cfg.samples[key] = int(value)
            if cp.has_section("perturb"):
                cfg.depth_max = int(cp["perturb"].get("depth_max", cfg.depth_max))
                cfg.key_shell = int(cp["perturb"].get("key_shell", cfg.key_shell))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad value in {args.config}: {exc}") from exc
    if args.seed is not None:
        cfg.seed = args.seed
    if args.K is not None:
        cfg.K = args.K
    if args.out is not None:
        cfg.out = Path(args.out)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    for key in _TOL_KEYS:
        v = getattr(cfg, key)
        if not (v >= 0 and math.isfinite(v)):
            raise ConfigError(f"tolerance {key} must be a nonnegative number, got {v}")
    if cfg.K < 1:
        raise ConfigError("K must be >= 1")
    if cfg.schedule not in ("factorial", "greedy"):
        raise ConfigError(f"unknown schedule {cfg.schedule!r}")
    if cfg.scale <= 0:
        raise ConfigError("scale must be positive")
    for key, v in cfg.samples.items():
        if v <= 0:
            raise ConfigError(f"sample size {key} must be positive")
    if any(m < 2 for m in cfg.m_prefix):
        raise ConfigError("m_prefix entries must be >= 2")


# --------------------------------------------------------------------------
# point and cocycle specifications


def parse_point(spec: str, params: words.WordParams):
    """``e:K:POS`` | ``junction:k`` | ``word:LETTERS:ANCHOR`` | ``near:RADIUS:POS``."""
    kind, _, rest = spec.partition(":")
    parts = rest.split(":") if rest else []
    try:
        if kind == "e":
            return inside_elementary(int(parts[0]), int(parts[1]), params)
        if kind == "junction":
            k = int(parts[0])
            pos = words.length_of(k + 1, params) - words.length_of(k, params)
            return inside_elementary(k + 2, pos, params)
        if kind == "word":
            return explicit_window(parts[0], int(parts[1]))
        if kind == "near":
            return point_at_radius(7, int(parts[1]), int(parts[0]), params)
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"bad point spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown point kind {kind!r}")


def parse_cocycle(spec: str, cfg: RunConfig):
    """``walters`` | ``identity`` | ``const:a,b,c,d`` | ``final`` (perturbed A)."""
    kind, _, rest = spec.partition(":")
    if kind == "walters":
        return walters_B(float(rest) if rest else cfg.scale)
    if kind == "identity":
        return identity_cocycle()
    if kind == "const":
        vals = [float(v) for v in rest.split(",")]
        if len(vals) != 4:
            raise ConfigError("const cocycle needs four entries")
        return constant_cocycle(np.array(vals).reshape(2, 2))
    if kind in ("final", "positive"):
        pert = _perturbation(cfg)
        return pert.A_map if kind == "final" else pert.P_map
    raise ConfigError(f"unknown cocycle {spec!r}")


def _schedule(cfg: RunConfig, name: Optional[str] = None):
    return default_schedule(name=name or cfg.schedule, scale=cfg.scale, params=cfg.params)


def _perturbation(cfg: RunConfig) -> Perturbation:
    return Perturbation(walters_B(cfg.scale), _schedule(cfg), cfg.params, K=cfg.K,
                        depth_max=cfg.depth_max, tol=cfg.bundle_tol)


# --------------------------------------------------------------------------
# reports


def write_report(cfg: RunConfig, stem: str, checks: list) -> bool:
    """``<stem>.json`` / ``<stem>.csv`` with stable content and
    ``<stem>_timings.json`` for wall-clock checks.  Prints one line per check."""
    for ch in checks:
        print(ch.line())
    stable = [c.to_json() for c in checks if not c.timing]
    timed = [c.to_json() for c in checks if c.timing]
    write_json(cfg.out / f"{stem}.json", stable)
    write_csv(cfg.out / f"{stem}.csv", ["criterion", "test", "paper_ref", "value", "bound", "pass"],
              [[c["criterion"], c["test"], c["paper_ref"], c["value"], c["bound"], c["pass"]]
               for c in stable])
    if timed:
        write_json(cfg.out / f"{stem}_timings.json", timed)
    ok = all(c.passed for c in checks)
    print(f"{'ALL PASS' if ok else 'FAILURES'}: {sum(c.passed for c in checks)}/{len(checks)}")
    return ok


# --------------------------------------------------------------------------
# words


def cmd_words(args, cfg: RunConfig) -> int:
    params = cfg.params
    if args.sub == "build":
        w = words.build_elementary(args.k, params)
        if args.conjugate:
            w = words.conjugate(w)
        name = f"{'conj_' if args.conjugate else ''}e_{args.k}"
        from .output import atomic_write
        atomic_write(cfg.out / f"{name}.txt", w + "\n")
        write_csv(cfg.out / f"{name}.csv", ["k", "conjugate", "length", "theta"],
                  [[args.k, args.conjugate, len(w), words.theta(w)]])
        print(w if len(w) <= args.print_max else f"{w[:args.print_max]}... ({len(w)} letters)")
        return EXIT_OK
    if args.sub == "freq":
        enc = words.phi_frequency(args.v, params, cfg.K)
        direct = None
        if words.length_of(cfg.K, params) <= 10 ** 7:
            direct = Fraction(words.count_subwords(words.build_elementary(cfg.K, params), args.v),
                              words.length_of(cfg.K, params))
        inside = direct is None or direct in enc
        row = [args.v, cfg.K, enc.lower, enc.upper, float(enc.lower), float(enc.upper),
               "" if direct is None else direct, inside]
        write_csv(cfg.out / "freq.csv",
                  ["pattern", "K", "lower", "upper", "lower_float", "upper_float",
                   "direct_ratio", "direct_inside"], [row])
        print(f"{args.v}: [{float(enc.lower):.17g}, {float(enc.upper):.17g}]"
              + ("" if direct is None else f" direct {direct} inside={inside}"))
        return EXIT_OK if inside else EXIT_FAIL
    if args.sub == "c":
        est = words.c_estimate(params, cfg.K)
        th, ln = words.theta_of_elementary(cfg.K, params), words.length_of(cfg.K, params)
        write_csv(cfg.out / "c_estimate.csv",
                  ["K", "theta", "length", "ratio", "ratio_float", "limit_lower", "limit_upper"],
                  [[cfg.K, th, ln, f"{th}/{ln}", th / ln, est.lower, est.upper]])
        print(f"{th}/{ln} = {th / ln:.17g}; limit in [{est.lower:.17g}, {est.upper:.17g}]")
        return EXIT_OK
    if args.sub == "census":
        w = words.build_elementary(cfg.K, params)
        rows = [[n, words.subword_complexity(w, n)] for n in range(1, args.n + 1)]
        write_csv(cfg.out / "census.csv", ["n", "distinct_subwords"], rows)
        for n, c in rows:
            print(n, c)
        return EXIT_OK
    raise ConfigError(args.sub)


# --------------------------------------------------------------------------
# cocycle


def cmd_cocycle(args, cfg: RunConfig) -> int:
    if args.sub == "sup":
        A = parse_cocycle(args.cocycle, cfg)
        ns = sorted(set(args.n))
        rows, sups = [], {}
        for n in ns:
            g = sup_and_mean_norm_growth(A, args.k_level, n, cfg.params, args.stride)
            sups[n] = g.sup * n
            rows.append([n, g.sup, g.mean, len(g.offsets)])
        bad = fekete_violations(sups, 1e-9)
        write_csv(cfg.out / "norm_growth.csv", ["n", "sup_exponent", "mean_exponent", "points"], rows)
        write_json(cfg.out / "norm_growth.json",
                   {"cocycle": A.name, "k_level": args.k_level, "subadditivity_violations": bad})
        for r in rows:
            print(*r)
        return EXIT_OK if not bad else EXIT_FAIL
    A = parse_cocycle(args.cocycle, cfg)
    x = parse_point(args.point, cfg.params)
    if args.sub == "lyap":
        value = finite_lyap(A, x, args.n)
        write_json(cfg.out / "lyap.json", {"cocycle": A.name, "point": args.point,
                                           "n": args.n, "exponent": value})
        print(f"{value:.17g}")
        return EXIT_OK
    if args.sub == "scan":
        use_oracle = args.oracle and A.walters_scale is not None
        scan = exponent_scan(A, x, args.n_max, args.parity, oracle=use_oracle, n_min=args.n_min)
        write_csv(cfg.out / "scan.csv", ["n", "log_norm", "exponent"],
                  zip(scan.ns, scan.log_norms, scan.exponents))
        (nmin, emin), (nmax, emax) = scan.min(), scan.max()
        write_json(cfg.out / "scan_summary.json",
                   {"cocycle": A.name, "point": args.point, "oracle": use_oracle,
                    "min": {"n": nmin, "exponent": emin}, "max": {"n": nmax, "exponent": emax},
                    "spread": scan.spread})
        if args.plot:
            svg_line_plot(cfg.out / "scan.svg", scan.ns, scan.exponents,
                          title=f"finite-time exponent, {A.name}", ylabel="(1/n) log norm")
        print(f"min {emin:.17g} at n={nmin}; max {emax:.17g} at n={nmax}")
        return EXIT_OK
    raise ConfigError(args.sub)


# --------------------------------------------------------------------------
# cone


def cmd_cone(args, cfg: RunConfig) -> int:
    if args.sub == "bundle":
        pert = _perturbation(cfg)
        x = parse_point(args.point, cfg.params)
        try:
            res = invariant_direction(pert.P_map, x, pert.lam0, cfg.depth_max, cfg.bundle_tol,
                                      strict=args.strict)
        except (OnYError, NoConvergenceError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_FAIL
        write_csv(cfg.out / "bundle_trace.csv", ["depth", "diameter", "t"], res.trace)
        write_json(cfg.out / "bundle.json",
                   {"point": args.point, "u": res.u.tolist(), "t": res.ray.t, "f": res.f,
                    "diameter": res.diameter, "depth": res.depth, "converged": res.converged,
                    "tolerance": cfg.bundle_tol})
        if args.plot:
            d = np.array([r[1] for r in res.trace])
            fin = np.isfinite(d) & (d > 0)
            svg_line_plot(cfg.out / "bundle_trace.svg", np.arange(1, len(d) + 1)[fin],
                          np.log10(d[fin]), title="cone diameter", xlabel="depth",
                          ylabel="log10 diameter")
        print(f"u = {res.u.tolist()} diameter {res.diameter:.3g} depth {res.depth}")
        return EXIT_OK if res.converged else EXIT_FAIL
    if args.sub == "check":
        suite = cfg.suite()
        if args.samples:
            suite.cone_samples = args.samples
        return EXIT_OK if write_report(cfg, "cone_check", acceptance.criterion_5(suite)) else EXIT_FAIL
    raise ConfigError(args.sub)


# --------------------------------------------------------------------------
# perturb


def cmd_perturb(args, cfg: RunConfig) -> int:
    if args.sub == "schedules":
        ok = True
        summary = {}
        for name in args.names:
            s = _schedule(cfg, name)
            checks = check_schedule(s)
            ok &= all(c.passed for c in checks)
            write_csv(cfg.out / f"schedule_{name}.csv", ["k", "M_k", "N_k", "eps_k"],
                      [[k, s.m(k), s.n(k) if k <= s.levels else "", s.epsilon(k)]
                       for k in range(1, len(s.M) + 1)])
            write_csv(cfg.out / f"schedule_{name}_checks.csv", ["check", "k", "pass", "detail"],
                      [[c.name, c.k, c.passed, c.detail] for c in checks])
            summary[name] = {"schedule": s.to_json(),
                             "checks_passed": sum(c.passed for c in checks),
                             "checks_total": len(checks)}
            print(f"{name}: M={s.M} N={[str(v) for v in s.N]} checks "
                  f"{sum(c.passed for c in checks)}/{len(checks)}")
        write_json(cfg.out / "schedules.json", summary)
        return EXIT_OK if ok else EXIT_FAIL
    pert = _perturbation(cfg)
    if args.sub == "sweep":
        if args.kind == "r-decay":
            shells = args.shells or [k for k in range(1, 6) if k in pert.schedule.reachable_shells()]
            rows = r_decay_sweep(pert, shells, args.per_shell, cfg.rng(91))
            cols = ["shell", "radius", "r", "bound", "diameter"]
            name = "r_decay"
        else:
            rows = []
            for k in args.shells or [cfg.key_shell]:
                rows += key_estimate_sweep(pert, k, args.per_shell, cfg.rng(92))
            cols = ["shell", "radius", "n", "deviation", "upper", "bound"]
            name = "key_estimate"
        write_csv(cfg.out / f"{name}.csv", cols, [[r[c] for c in cols] for r in rows])
        if name == "r_decay":
            mx = {}
            for r in rows:
                mx[r["shell"]] = max(mx.get(r["shell"], 0.0), abs(r["r"]))
            seq = [mx[k] for k in sorted(mx)]
            mono = all(b <= a for a, b in zip(seq, seq[1:]))
            write_json(cfg.out / "r_decay_summary.json",
                       {"max_abs_r_per_shell": {str(k): mx[k] for k in sorted(mx)},
                        "nonincreasing": mono})
            print(f"max|r| per shell {seq} nonincreasing={mono}")
        else:
            for r in rows:
                print(f"shell {r['shell']} radius {r['radius']} deviation {r['deviation']:.6g} "
                      f"bound {r['bound']:.6g}")
        return EXIT_OK
    if args.sub == "verify":
        suite = cfg.suite()
        suite.key_shell = args.shell
        checks = acceptance.criterion_7(suite) + acceptance.criterion_8(suite)
        sink: dict = {}
        checks += acceptance.criterion_9(suite, sink)
        cols = ["shell", "radius", "r", "bound", "diameter"]
        write_csv(cfg.out / "verify_r_decay.csv", cols, [[r[c] for c in cols] for r in sink["r_decay"]])
        cols = ["shell", "radius", "n", "deviation", "upper", "bound"]
        write_csv(cfg.out / "verify_key_estimate.csv", cols,
                  [[r[c] for c in cols] for r in sink["key_estimate"]])
        return EXIT_OK if write_report(cfg, "perturb_verify", checks) else EXIT_FAIL
    raise ConfigError(args.sub)


# --------------------------------------------------------------------------
# verify-all


def cmd_verify_all(args, cfg: RunConfig) -> int:
    t0 = time.perf_counter()
    suite = cfg.suite()
    sink: dict = {}
    only = args.only or None
    checks = acceptance.run_all(suite, only=only, sink=sink)
    dt = time.perf_counter() - t0
    if not only:
        checks.append(Check(10, "verify_all_runtime_s", dt, 600.0, dt < 600.0, timing=True))
        others = all(c.passed for c in checks)
        checks.append(Check(10, "verify_all_exit_status", 0 if others else 1, 0, others))
    if "band" in sink:
        write_csv(cfg.out / "band_exponents.csv", ["orbit", "exponent"], enumerate(sink["band"]))
    ok = write_report(cfg, "verify_all", checks)
    print(f"elapsed {dt:.1f}s")
    return EXIT_OK if ok else EXIT_FAIL


# --------------------------------------------------------------------------


def _global_flags(default) -> argparse.ArgumentParser:
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--config", default=default, help="config file (see veech --help for keys)")
    g.add_argument("--out", default=default, help="output directory (created if missing)")
    g.add_argument("--seed", type=int, default=default, help="random seed")
    g.add_argument("--K", type=int, default=default, help="host level K")
    return g


def build_parser() -> argparse.ArgumentParser:
    # subcommands accept the global flags too; SUPPRESS keeps them from
    # overwriting values given before the verb
    common = _global_flags(argparse.SUPPRESS)
    p = argparse.ArgumentParser(prog="veech", parents=[_global_flags(None)],
                                formatter_class=argparse.RawDescriptionHelpFormatter,
                                description="Cocycle experiments over the elementary-word subshift.",
                                epilog=CONFIG_HELP)
    verbs = p.add_subparsers(dest="verb", required=True)

    w = verbs.add_parser("words", help="words, frequencies, c, census").add_subparsers(dest="sub", required=True)
    b = w.add_parser("build", parents=[common])
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--conjugate", action="store_true")
    b.add_argument("--print-max", type=int, default=200)
    f = w.add_parser("freq", parents=[common])
    f.add_argument("--v", required=True, help="pattern over U, D, Z")
    w.add_parser("c", parents=[common])
    c = w.add_parser("census", parents=[common])
    c.add_argument("--n", type=int, default=12)

    cc = verbs.add_parser("cocycle", help="exponents and scans").add_subparsers(dest="sub", required=True)
    cocycle_help = "walters[:s] | identity | const:a,b,c,d | positive | final"
    point_help = "e:K:POS | junction:k | word:LETTERS:ANCHOR | near:RADIUS:POS"
    ly = cc.add_parser("lyap", parents=[common])
    ly.add_argument("--cocycle", default="walters", help=cocycle_help)
    ly.add_argument("--point", default="e:7:0", help=point_help)
    ly.add_argument("--n", type=int, default=words.length_of(6))
    sc = cc.add_parser("scan", parents=[common])
    sc.add_argument("--cocycle", default="walters", help=cocycle_help)
    sc.add_argument("--point", default="junction:5", help=point_help)
    sc.add_argument("--n-max", type=int, default=words.length_of(6))
    sc.add_argument("--n-min", type=int, default=1)
    sc.add_argument("--parity", choices=("even", "odd", "all"), default="even")
    sc.add_argument("--oracle", action="store_true", help="exact integer route (Walters only)")
    sc.add_argument("--plot", action="store_true")
    su = cc.add_parser("sup", parents=[common])
    su.add_argument("--cocycle", default="walters", help=cocycle_help)
    su.add_argument("--k-level", type=int, default=5)
    su.add_argument("--n", type=int, nargs="+", default=[2, 4, 8, 16, 32, 64, 128, 256])
    su.add_argument("--stride", type=int, default=1)

    co = verbs.add_parser("cone", help="invariant directions and cone checks").add_subparsers(dest="sub", required=True)
    bu = co.add_parser("bundle", parents=[common])
    bu.add_argument("--point", default="near:27:1000000", help=point_help)
    bu.add_argument("--strict", action="store_true")
    bu.add_argument("--plot", action="store_true")
    ck = co.add_parser("check", parents=[common])
    ck.add_argument("--samples", type=int)

    pe = verbs.add_parser("perturb", help="schedules and perturbation sweeps").add_subparsers(dest="sub", required=True)
    sch = pe.add_parser("schedules", parents=[common])
    sch.add_argument("--names", nargs="+", default=["factorial", "greedy"], choices=("factorial", "greedy"))
    sw = pe.add_parser("sweep", parents=[common])
    sw.add_argument("--kind", choices=("r-decay", "key"), default="r-decay")
    sw.add_argument("--shells", type=int, nargs="*")
    sw.add_argument("--per-shell", type=int, default=40)
    ve = pe.add_parser("verify", parents=[common])
    ve.add_argument("--shell", type=int, default=5)

    va = verbs.add_parser("verify-all", parents=[common], help="run the acceptance suite")
    va.add_argument("--only", type=int, nargs="*", help="subset of criteria 1-9")
    return p


COMMANDS = {"words": cmd_words, "cocycle": cmd_cocycle, "cone": cmd_cone,
            "perturb": cmd_perturb, "verify-all": cmd_verify_all}


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        cfg.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.verb](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (words.WordError, OutOfWindowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
