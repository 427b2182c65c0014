"""Command-line front end: ``czic {region,gp,simulate,verify,fixtures}``.

Every run writes ``manifest.json`` into ``--out``, also when it fails.
Exit codes: 0 success, 1 bad input or a failed check, 2 infeasible target or
exceeded size budget.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Optional

import numpy as np

from czic import fixtures
from czic.bounds import (
    KINDS,
    SearchConfig,
    fmt,
    max_r2,
    optimize_point,
    region_hull,
    trace_region,
)
from czic.channel import AuxScheme, CognitiveZic, assemble_joint, is_noiseless_component, load_channel
from czic.errors import BudgetExceeded, CzicError, Infeasible, ParseError, TooLarge
from czic.gp import check_gp_reduction, gp_curve
from czic.sim import DEFAULT_BUDGET, DEFAULT_EPS, derive_rate_alloc, reports_csv, simulate, violate
from czic.verify import run_suite

EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2


def _version() -> str:
    try:
        return metadata.version("czic")
    except metadata.PackageNotFoundError:
        return "0+unknown"


@dataclass
class RunManifest:
    command: str
    input: Optional[str]
    config: dict
    seed: int
    outputs: list = field(default_factory=list)
    version: str = field(default_factory=_version)
    duration_s: float = 0.0
    exit_code: int = 0
    error: Optional[str] = None


class Run:
    """Collects outputs of one command and owns the output directory."""

    def __init__(self, args):
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.manifest = RunManifest(args.command, args.channel, {}, args.seed)

    def write(self, name: str, text: str) -> Path:
        path = self.out / name
        path.write_text(text, encoding="utf-8")
        self.manifest.outputs.append(str(path))
        return path

    def write_json(self, name: str, doc) -> Path:
        return self.write(name, json.dumps(doc, indent=2, sort_keys=True) + "\n")

    def close(self, started: float) -> None:
        self.manifest.duration_s = round(time.perf_counter() - started, 3)
        path = self.out / "manifest.json"
        path.write_text(json.dumps(asdict(self.manifest), indent=2) + "\n", encoding="utf-8")


def _channel(spec: Optional[str]) -> CognitiveZic:
    if spec is None:
        raise ParseError("--channel is required")
    if spec.startswith("fixture:"):
        try:
            return fixtures.get(spec.split(":", 1)[1])
        except KeyError as exc:
            raise ParseError(str(exc)) from None
    return load_channel(Path(spec))


def _search_config(args) -> SearchConfig:
    return SearchConfig(
        v_cap=args.v_cap,
        u_cap=args.u_cap,
        restarts=args.restarts,
        r2_grid=args.r2_grid,
        seed=args.seed,
        threads=args.threads,
    )


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


# -- commands ----------------------------------------------------------------


def cmd_region(args, run: Run) -> int:
    zic = _channel(args.channel)
    cfg = _search_config(args)
    run.manifest.config = asdict(cfg.resolved(zic))
    kinds = KINDS if args.kind == "all" else (args.kind,)
    if args.kind == "all" and not is_noiseless_component(zic):
        kinds = ("inner", "outer")
        print("note: noisy X2 -> Y2 link, capacity kind skipped", file=sys.stderr)
    regions = {}
    for kind in kinds:
        region = trace_region(zic, kind, cfg)
        regions[kind] = region
        run.write(f"region_{kind}.csv", region.to_csv())
        run.write(f"region_{kind}.json", region.to_json())
        if args.convex_hull:
            hull = region_hull(region)
            run.write(f"hull_{kind}.csv", _csv(("r2", "r1"), [(fmt(a), fmt(b)) for a, b in hull]))
    if args.kind == "all" and "capacity" in regions:
        a, b, c = (regions[k].points for k in KINDS)
        gaps = [abs(p.best_r1 - q.best_r1) for p, q in zip(a, b)]
        cap_gaps = [abs(p.best_r1 - q.best_r1) for p, q in zip(a, c)]
        report = {
            "max_inner_outer_gap": max(gaps),
            "max_inner_capacity_gap": max(cap_gaps),
            "r2_max": {k: regions[k].r2_max for k in KINDS},
            "per_point": [
                {"r2_target": p.r2_target, "inner": p.best_r1, "outer": q.best_r1, "capacity": r.best_r1}
                for p, q, r in zip(a, b, c)
            ],
        }
        run.write_json("coincidence.json", report)
        print(f"coincidence: max |inner - outer| = {report['max_inner_outer_gap']:.3g}")
    for kind, region in regions.items():
        print(f"{kind}: R2max={region.r2_max:.6f}, best r1 at R2=0: {region.points[0].best_r1:.6f}")
    return EXIT_OK


def cmd_gp(args, run: Run) -> int:
    zic = _channel(args.channel)
    cfg = _search_config(args)
    run.manifest.config = asdict(cfg.resolved(zic))
    top = args.r2_max if args.r2_max is not None else math.log2(zic.x2_size)
    values = np.linspace(0.0, top, args.r2_grid) if args.r2_grid > 1 else np.array([top])
    curve = gp_curve(zic, values, cfg)
    run.write("gp_curve.csv", _csv(("r2", "c_r2"), [(fmt(r), fmt(c)) for r, c in curve]))
    report = check_gp_reduction(zic, cfg)
    run.write("gp_reduction.json", report.to_json())
    print(f"C(log|X2|) = {report.c_full:.6f}, GP rate = {report.gp_rate:.6f}, "
          f"gap {report.gap:+.2e} ({'pass' if report.passed else 'FAIL'})")
    return EXIT_OK if report.passed else EXIT_INPUT


def _load_scheme(path: str) -> AuxScheme:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read scheme {path}: {exc}") from exc
    return AuxScheme.from_dict(doc)


def _default_scheme(zic: CognitiveZic, cfg: SearchConfig) -> AuxScheme:
    # half-way along the inner-bound frontier: both users get some rate
    top, _ = max_r2(zic, "inner", cfg)
    return optimize_point(zic, "inner", top / 2, cfg)[1]


def _n_list(text: str) -> list[int]:
    try:
        ns = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ParseError(f"--n-list must be comma separated integers, got {text!r}") from None
    if not ns or min(ns) < 1:
        raise ParseError("--n-list needs positive blocklengths")
    return ns


def cmd_simulate(args, run: Run) -> int:
    zic = _channel(args.channel)
    if args.trials < 1:
        raise ParseError("--trials must be >= 1")
    ns = _n_list(args.n_list)
    cfg = _search_config(args)
    run.manifest.config = {
        "search": asdict(cfg.resolved(zic)),
        "margin": args.margin,
        "eps": args.eps,
        "trials": args.trials,
        "n_list": ns,
        "violate": args.violate,
        "budget": args.budget,
    }
    scheme = _load_scheme(args.scheme) if args.scheme else _default_scheme(zic, cfg)
    joint = assemble_joint(zic, scheme)
    alloc = derive_rate_alloc(joint, args.margin)
    if args.violate:
        alloc = violate(alloc, joint, args.violate, args.excess)
    run.write_json("scheme.json", scheme.to_dict())
    reports = [simulate(zic, scheme, alloc, n, args.trials, args.eps, args.seed, args.budget) for n in ns]
    run.write("simulation.csv", reports_csv(reports))
    run.write_json("simulation.json", {"alloc": asdict(alloc), "reports": [r.to_dict() for r in reports]})
    for rep in reports:
        print(f"n={rep.n}: pErr1={rep.p_err1:.4f} pErr2={rep.p_err2:.4f} enc_failures={rep.enc_failures}")
    return EXIT_OK


def cmd_verify(args, run: Run) -> int:
    extra = [_channel(args.channel)] if args.channel else []
    run.manifest.config = {"seed": args.seed}
    results = run_suite(args.seed, extra, report=lambda r: print(r.line(), flush=True))
    run.write_json("verify.json", [asdict(r) for r in results])
    return EXIT_OK if all(r.passed for r in results) else EXIT_INPUT


def cmd_fixtures(args, run: Run) -> int:
    for name in {**fixtures.STOCK, **fixtures.EXTRA}:
        run.write_json(f"{name}.json", fixtures.get(name).to_dict())
    run.write_json("xor_precoding_scheme.json", fixtures.xor_precoding_scheme().to_dict())
    return EXIT_OK


COMMANDS = {
    "region": cmd_region,
    "gp": cmd_gp,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "fixtures": cmd_fixtures,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--channel", help="channel JSON file, or fixture:NAME")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="out", help="output directory (default: ./out)")
    common.add_argument("--threads", type=int, default=1)

    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--r2-grid", type=int, default=9)
    search.add_argument("--v-cap", type=int)
    search.add_argument("--u-cap", type=int)
    search.add_argument("--restarts", type=int, default=8)

    parser = argparse.ArgumentParser(prog="czic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("region", parents=[common, search], help="trace a rate region frontier")
    p.add_argument("--kind", choices=(*KINDS, "all"), default="inner")
    p.add_argument("--convex-hull", action="store_true", help="also write the upper concave envelope")

    p = sub.add_parser("gp", parents=[common, search], help="C(R2) curve and the GP reduction check")
    p.add_argument("--r2-max", type=float, help="right end of the R2 grid (default log2|X2|)")

    p = sub.add_parser("simulate", parents=[common, search], help="Monte Carlo run of the coding scheme")
    p.add_argument("--scheme", help="scheme JSON; default optimizes one on the inner bound")
    p.add_argument("--n-list", default="8,12,16")
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--margin", type=float, default=0.1)
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max codeword symbols")
    p.add_argument("--violate", choices=("ach1", "ach2", "ach3", "ach4", "ach5"))
    p.add_argument("--excess", type=float, default=0.2)

    sub.add_parser("verify", parents=[common], help="run the invariant suite")
    sub.add_parser("fixtures", parents=[common], help="write the built-in channels as JSON")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 is reserved for infeasible/budget here
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    started = time.perf_counter()
    run = Run(args)
    try:
        code = COMMANDS[args.command](args, run)
    except (Infeasible, BudgetExceeded, TooLarge) as exc:
        code, run.manifest.error = EXIT_BUDGET, f"{type(exc).__name__}: {exc}"
    except (CzicError, ValueError) as exc:
        code, run.manifest.error = EXIT_INPUT, f"{type(exc).__name__}: {exc}"
    if run.manifest.error:
        print(f"error: {run.manifest.error}", file=sys.stderr)
    run.manifest.exit_code = code
    run.close(started)
    return code


if __name__ == "__main__":
    sys.exit(main())
