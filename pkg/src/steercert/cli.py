"""Command-line front end: ``steercert {ideal,lhs-bound,robustness,certify,extremal,sample}``.

Exit codes: 0 success, 2 parse error, 3 validation error, 4 certification or
extremality failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import lhs, robustness, tolerances
from .certify import CertificationError, CertificationInput, InvalidInputError, NotEntangledError, certify
from .linalg import DimensionError
from .povm import alice_ideal, bob_ideal, check_extremality, validate_set
from .scenario import (
    InvalidStateError,
    JointDistribution,
    assemblage_from,
    distribution_from,
    estimate_W,
    sample_shots,
    steering_functional,
)
from .serialize import (
    ParseError,
    csv_lines,
    dumps,
    encode_matrix,
    load_json,
    parse_measurements,
    parse_state,
)

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_FAIL = 0, 2, 3, 4
ROBUSTNESS_HEADER = "delta,epsilon,w_closed,w_sim,discrepancy"
SHOTS_HEADER = "x,y,a,b"
DEFAULT_SEED = 0
DEFAULT_GRID = 512

log = logging.getLogger("steercert")


class ValidationFailure(Exception):
    pass


def thread_cap() -> int:
    """STEERCERT_THREADS (0 = auto). Computation is vectorized and single-threaded; the value is validated only."""
    raw = os.environ.get("STEERCERT_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValidationFailure(f"STEERCERT_THREADS={raw!r} is not an integer") from None
    if n < 0:
        raise ValidationFailure("STEERCERT_THREADS must be >= 0")
    return n


def _extremality_dict(m) -> list:
    out = []
    for x, p in enumerate(m):
        r = check_extremality(p)
        out.append({
            "setting": x,
            "applicable": r.applicable,
            "extremal": r.extremal,
            "matrix_rank": r.matrix_rank,
            "element_ranks": r.element_ranks,
        })
    return out


def cmd_ideal(args) -> tuple:
    state = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    alice, bob = alice_ideal(), bob_ideal()
    d = distribution_from(state, alice, bob)
    sigma = assemblage_from(state, bob)
    table = [
        {"x": x, "y": y, "a": a, "b": b, "p": float(d.p[x, y, a, b])}
        for x in range(3) for y in range(3) for a in range(3) for b in range(3)
    ]
    report = {
        "W": steering_functional(d),
        "probabilities": table,
        "assemblage_traces": sigma.traces().tolist(),
        "extremality": {"alice": _extremality_dict(alice), "bob": _extremality_dict(bob)},
    }
    return dumps(report), EXIT_OK


def cmd_lhs_bound(args) -> tuple:
    alice = alice_ideal()
    res = lhs.optimize_bound(alice, grid=args.grid, xatol=args.tolerance)
    optima = lhs.strategy_optima(alice)
    best = min(optima, key=lambda s: s.min_sum)
    report = {
        "beta_L": res.beta_L,
        "argmin": {"theta": res.argmin.theta, "phi": res.argmin.phi},
        "objective_at_argmin": res.objective_at_argmin,
        "grid_resolution": res.grid_resolution,
        "refinement_iterations": res.refinement_iterations,
        "cross_check": 3 - best.min_sum,
        "cross_check_strategy": list(best.strategy),
        "restricted_unweighted_bound": lhs.restricted_unweighted_bound(alice, args.grid),
        "seed": args.seed,
    }
    return dumps(report), EXIT_OK


def _grid(lo, hi, steps) -> np.ndarray:
    if steps < 1:
        raise ValidationFailure("grid steps must be >= 1")
    return np.linspace(lo, hi, steps) if steps > 1 else np.array([lo])


def cmd_robustness(args) -> tuple:
    eps = _grid(args.eps_min, args.eps_max, args.eps_steps)
    deltas = _grid(args.delta_min, args.delta_max, args.delta_steps)
    rows = robustness.sweep(eps, deltas, args.convention)
    if args.format == "csv":
        body = csv_lines(ROBUSTNESS_HEADER, [
            (r.delta, r.epsilon, r.W_closed_form, r.W_simulated, r.discrepancy) for r in rows
        ])
        return body, EXIT_OK
    report = {
        "convention": args.convention,
        "rows": [
            {"delta": r.delta, "epsilon": r.epsilon, "w_closed": r.W_closed_form,
             "w_sim": r.W_simulated, "discrepancy": r.discrepancy, "clipped": r.clipped}
            for r in rows
        ],
        "max_discrepancy": max(r.discrepancy for r in rows),
    }
    return dumps(report), EXIT_OK


def _need_input(args):
    if not args.input:
        raise ParseError("--input is required for this command")
    return load_json(args.input)


def _load_certification_input(args) -> CertificationInput:
    obj = _need_input(args)
    if not isinstance(obj, dict):
        raise ParseError(f"{args.input}: expected a JSON object")
    for key in ("state", "bob"):
        if key not in obj:
            raise ParseError(f"{args.input}: missing field {key!r}")
    psi = parse_state(obj["state"], "state")
    bob = parse_measurements(obj["bob"], "bob")
    try:
        return CertificationInput(psi, bob)
    except (DimensionError, ValueError) as exc:
        raise ValidationFailure(str(exc)) from None


def cmd_certify(args) -> tuple:
    inp = _load_certification_input(args)
    try:
        rep = certify(inp, args.tolerance)
    except NotEntangledError as exc:
        return dumps({"passed": False, "error": "not_entangled", "message": str(exc)}), EXIT_FAIL
    except InvalidInputError as exc:
        raise ValidationFailure(str(exc)) from None
    out = rep.as_dict()
    out["extracted_unitary"] = encode_matrix(rep.extracted_unitary)
    return dumps(out), EXIT_OK if rep.passed else EXIT_FAIL


def cmd_extremal(args) -> tuple:
    obj = _need_input(args)
    m = parse_measurements(obj.get("measurements", obj) if isinstance(obj, dict) else obj)
    bad = validate_set(m)
    if bad:
        raise ValidationFailure("; ".join(f"settings[{x}]: {v}" for x, v in bad))
    reports = _extremality_dict(m)
    ok = all(r["applicable"] and r["extremal"] for r in reports)
    return dumps({"extremal": ok, "settings": reports}), EXIT_OK if ok else EXIT_FAIL


def _load_distribution(args) -> JointDistribution:
    obj = _need_input(args)
    if not isinstance(obj, dict):
        raise ParseError(f"{args.input}: expected a JSON object")
    if "distribution" in obj:
        try:
            return JointDistribution(np.array(obj["distribution"], dtype=float))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"distribution: {exc}") from None
    if "state" not in obj or "bob" not in obj:
        raise ParseError(f"{args.input}: need 'distribution' or both 'state' and 'bob'")
    psi = parse_state(obj["state"], "state")
    bob = parse_measurements(obj["bob"], "bob")
    alice = parse_measurements(obj["alice"], "alice") if "alice" in obj else alice_ideal()
    try:
        return distribution_from(psi, alice, bob)
    except (DimensionError, InvalidStateError) as exc:
        raise ValidationFailure(str(exc)) from None


def cmd_sample(args) -> tuple:
    d = _load_distribution(args)
    bad = d.violations()
    if bad:
        raise ValidationFailure("; ".join(bad))
    rec = sample_shots(d, args.shots, args.seed)
    w_hat, se = estimate_W(rec)
    log.info("W_hat = %.6f +- %.6f over %d shots", w_hat, se, len(rec))
    body = f"# seed={args.seed} n={args.shots}\n" + csv_lines(SHOTS_HEADER, rec.rows())
    return body, EXIT_OK


COMMANDS = {
    "ideal": cmd_ideal,
    "lhs-bound": cmd_lhs_bound,
    "robustness": cmd_robustness,
    "certify": cmd_certify,
    "extremal": cmd_extremal,
    "sample": cmd_sample,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="steercert", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--input", help="input JSON file")
    ap.add_argument("--output", help="write the result here instead of stdout")
    ap.add_argument("--format", choices=["json", "csv"], default=None)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--grid", type=int, default=DEFAULT_GRID)
    ap.add_argument("--tolerance", type=float, default=tolerances.CERTIFICATION)
    ap.add_argument("--shots", type=int, default=100_000)
    ap.add_argument("--eps-min", type=float, default=0.0)
    ap.add_argument("--eps-max", type=float, default=0.5)
    ap.add_argument("--eps-steps", type=int, default=11)
    ap.add_argument("--delta-min", type=float, default=-0.3)
    ap.add_argument("--delta-max", type=float, default=0.3)
    ap.add_argument("--delta-steps", type=int, default=7)
    ap.add_argument("--convention", choices=robustness.CONVENTIONS, default="shifted",
                    help="parametrization of the imbalanced state")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.format is None:
        args.format = "csv" if args.command == "robustness" else "json"
    try:
        if args.tolerance <= 0:
            raise ValidationFailure("--tolerance must be positive")
        if args.grid < 2:
            raise ValidationFailure("--grid must be at least 2")
        if args.shots < 1:
            raise ValidationFailure("--shots must be at least 1")
        thread_cap()
        body, code = COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FileNotFoundError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValidationFailure, robustness.NoiseRangeError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CertificationError as exc:
        print(f"certification error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)
    return code


if __name__ == "__main__":
    sys.exit(main())
