"""Command-line entry point: ``bia construct|verify|dof|simulate``.

Exit codes: 0 success, 1 a checked property failed, 2 usage error or
infeasible parameters.

With ``--out PATH`` the payload goes to PATH and a run manifest to
``PATH.manifest.json``. Payload bytes depend only on the flags and seeds;
the manifest alone carries the wall-clock timestamp.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import __version__
from .channel import Representation
from .construct import Mode, construct
from .dof import DOF_CSV_COLUMNS, dof_formula, dof_table_rows
from .errors import BIAError, InfeasibleParams
from .seeding import CHANNEL, derive_seed
from .serialize import (canonical_json, construction_from_dict,
                        construction_to_dict, digest)
from .simulate import DEFAULT_SNR_DB, SimulationConfig, simulate_rates
from .verify import verify_construction

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


def parse_k_range(text: str) -> List[int]:
    """``"7"``, ``"1..100"`` or ``"3,5,8"`` (items may themselves be ranges)."""
    out: List[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = (int(x) for x in part.split("..", 1))
            if hi < lo:
                raise argparse.ArgumentTypeError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError(f"bad K range {text!r}")
    return out


def parse_float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def channel_seeds(root: int, count: int) -> List[int]:
    return [derive_seed(root, CHANNEL, i) for i in range(count)]


def _csv_text(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _emit(args, command: str, payloads: Dict[str, str], stdout_text: str,
          seeds: Optional[List[int]] = None) -> None:
    """Write payload files plus manifest, or print to stdout."""
    if not args.out:
        sys.stdout.write(stdout_text)
        return
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    digests = {}
    for suffix, text in payloads.items():
        path = out if not suffix else out.with_name(out.name + suffix)
        path.write_text(text)
        digests[path.name] = digest(text)
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    manifest = {
        "schema": 1, "kind": "manifest", "command": command, "flags": flags,
        "seeds": seeds or [], "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "outputs": digests,
    }
    out.with_name(out.name + ".manifest.json").write_text(canonical_json(manifest))
    if "" in payloads and payloads[""] is not stdout_text:
        sys.stdout.write(stdout_text)


def _load_or_build(args):
    if getattr(args, "bundle", None):
        return construction_from_dict(json.loads(Path(args.bundle).read_text()))
    if args.users is None:
        raise InfeasibleParams("either --users or --bundle is required")
    return construct(args.users, args.order, args.mode)


def cmd_construct(args) -> int:
    cons = construct(args.users, args.order, args.mode)
    text = canonical_json(construction_to_dict(cons))
    _emit(args, "construct", {"": text}, text)
    return EXIT_OK


def cmd_verify(args) -> int:
    cons = _load_or_build(args)
    seeds = channel_seeds(args.seed, args.seeds)
    rep = Representation.FLOAT if args.float else Representation.EXACT
    report = verify_construction(cons, seeds, rep, workers=None)
    text = canonical_json(report)
    brief = canonical_json({k: report[k] for k in
                            ("params", "representation", "summary", "failing_seeds", "passed")})
    _emit(args, "verify", {"": text}, text if not args.brief else brief, seeds)
    return EXIT_OK if report["passed"] else EXIT_VIOLATION


def cmd_dof(args) -> int:
    text = _csv_text(dof_table_rows(args.k), DOF_CSV_COLUMNS)
    _emit(args, "dof", {"": text}, text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cons = construct(args.users, args.order, args.mode)
    seeds = channel_seeds(args.seed, args.seeds)
    report = verify_construction(cons, seeds[:1], Representation.EXACT, workers=1)
    if not report["passed"] and not args.allow_unverified:
        sys.stdout.write(canonical_json({
            "error": "verification failed; refusing to simulate",
            "summary": report["summary"],
            "failures": report["per_seed"][0]["failures"]}))
        return EXIT_VIOLATION
    config = SimulationConfig(cons.params, seeds=tuple(seeds), snr_db=tuple(args.snr_db),
                              trials_per_point=args.trials)
    curve = simulate_rates(config, cons)
    target = dof_formula(cons.params.K, cons.params.r)
    census = simulate_rates(SimulationConfig(cons.params, seeds=tuple(seeds[:1])), cons,
                            noise_free=True).census_dof
    slope = curve.slope_estimate
    summary = {
        "schema": 1, "kind": "simulation-summary",
        "params": cons.params.to_dict(),
        "snr_db": list(config.snr_db), "seeds": seeds, "trials": args.trials,
        "slope": None if slope is None else round(slope, 12),
        "target_dof": f"{target.numerator}/{target.denominator}",
        "target_dof_float": round(float(target), 12),
        "relative_error": None if slope is None else
        round(abs(slope - float(target)) / float(target), 12),
        "census_dof": f"{census.numerator}/{census.denominator}",
        "scheme_dof": "{0.numerator}/{0.denominator}".format(
            _scheme_dof(cons.params)),
        "verified": report["passed"],
    }
    summary_text = canonical_json(summary)
    csv_text = _csv_text(curve.csv_rows(), ("snr_db", "user", "rate", "sum_rate"))
    _emit(args, "simulate", {"": csv_text, ".summary.json": summary_text},
          summary_text, seeds)
    return EXIT_OK


def _scheme_dof(params) -> Fraction:
    """Symbols per slot the scheme schedules, K d / n (below target when padded)."""
    return Fraction(params.K * params.d, params.n)


def _add_scheme_flags(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--users", "-k", type=int, required=required, help="number of users K")
    p.add_argument("--order", "-r", type=int, default=None,
                   help="alignment order r (default: DoF-optimal)")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.PAPER_EXACT.value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bia", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="emit S, B, precoders, switching as JSON")
    _add_scheme_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", help="run the rank checks over channel seeds")
    _add_scheme_flags(p, required=False)
    p.add_argument("--bundle", help="construction bundle JSON to verify")
    p.add_argument("--seed", type=int, default=0, help="root seed")
    p.add_argument("--seeds", type=int, default=1, help="number of channel draws")
    arith = p.add_mutually_exclusive_group()
    arith.add_argument("--exact", action="store_true", default=True)
    arith.add_argument("--float", action="store_true", default=False)
    p.add_argument("--brief", action="store_true", help="print only the summary")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("dof", help="DoF table as CSV")
    p.add_argument("--k", "--users", "-k", dest="k", type=parse_k_range, required=True,
                   help='K values: "7", "1..100" or "3,5,8"')
    p.add_argument("--out")
    p.set_defaults(func=cmd_dof)

    p = sub.add_parser("simulate", help="rate curve and DoF slope")
    _add_scheme_flags(p)
    p.add_argument("--snr-db", type=parse_float_list, default=list(DEFAULT_SNR_DB))
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="root seed")
    p.add_argument("--seeds", type=int, default=10, help="number of channel seeds")
    p.add_argument("--allow-unverified", action="store_true",
                   help="simulate even if the verification stage fails")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleParams as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except BIAError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
