"""
Command-line front end.

Every subcommand prints one JSON object on stdout carrying
``"schema": "sparse-mahler/1"``; measures are always given both as
``m`` (log scale, nats) and ``M`` (linear scale). Domain errors go to
stderr as ``{"schema", "error": {"code", "message"}}`` with exit code 1,
usage errors exit with code 2.
"""
import argparse
import csv
import io
import json
import logging
import math
import sys
from typing import Any, Callable, Dict, List, Optional

from pydantic import ValidationError

from app.config import settings
from app.models.census import CensusKind, SearchConfig
from app.models.measure import MeasureEstimate
from app.services.bounds_service import bounds_service
from app.services.census_service import census_service
from app.services.cyclotomic_service import cyclotomic_service
from app.services.multivar_measure_service import multivar_measure_service
from app.services.polynomial_service import polynomial_service
from app.services.roots_measure_service import roots_measure_service
from app.utils.errors import InvalidArgumentError, SparseMahlerError
from app.utils.helpers import dump_json, parse_int_list, parse_matrix, parse_shard, with_schema
from app.utils.poly_parser import MULTIVARIATE, UNIVARIATE, format_poly, parse_poly
from app.utils.record_store import RecordStore

logger = logging.getLogger(__name__)

Payload = Dict[str, Any]


def _usage_type(parse: Callable[[str], Any]) -> Callable[[str], Any]:
    """Turn domain parse errors on flag values into argparse usage errors"""
    def convert(text: str) -> Any:
        try:
            return parse(text)
        except InvalidArgumentError as e:
            raise argparse.ArgumentTypeError(e.message)
    convert.__name__ = parse.__name__
    return convert


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _estimate(estimate: MeasureEstimate) -> Payload:
    payload = {
        "m": estimate.log_value,
        "M": estimate.mahler,
        "method": estimate.method.value,
        "error_bound": estimate.error_bound,
    }
    if estimate.points is not None:
        payload["points"] = estimate.points
        payload["skipped_points"] = estimate.skipped_points
    return payload


def _univariate(text: str):
    return parse_poly(text, UNIVARIATE)


def _multivariate(text: str):
    return parse_poly(text, MULTIVARIATE)


# Measures

def cmd_measure(args) -> Payload:
    f = _univariate(args.poly)
    estimate = roots_measure_service.mahler_measure(
        f, method=args.method, num_points=args.points, threads=args.threads
    )
    return {"poly": format_poly(f), **_estimate(estimate)}


def cmd_measure_multi(args) -> Payload:
    F = _multivariate(args.poly)
    estimate = multivar_measure_service.mahler_qmc(
        F, budget=args.budget, seed=args.seed, threads=args.threads
    )
    return {"poly": format_poly(F), **_estimate(estimate)}


def cmd_restrict(args) -> Payload:
    F = _multivariate(args.poly)
    g = multivar_measure_service.restrict(F, args.n)
    return {
        "poly": format_poly(F),
        "n": args.n,
        "restriction": format_poly(g),
        "degree": g.degree,
        "height_preserved": polynomial_service.height(g) == polynomial_service.height(F),
        "term_count_preserved": g.term_count == F.term_count,
    }


def cmd_boyd_lawton(args) -> Payload:
    F = _multivariate(args.poly)
    table = multivar_measure_service.boyd_lawton_sequence(F, args.ns, threads=args.threads)
    return {
        "poly": format_poly(F),
        "rows": [
            {"n": row.n, "degree": row.degree, "height_preserved": row.height_preserved, **_estimate(row.estimate)}
            for row in table.rows
        ],
        "_csv": table.to_csv(),
    }


def cmd_safe_n(args) -> Payload:
    F = _multivariate(args.poly)
    index = multivar_measure_service.safe_substitution_index(F)
    return {
        "poly": format_poly(F),
        "threshold": index.threshold,
        "witness": list(index.witness),
        "first_safe_n": index.first_safe_n,
    }


def cmd_substitute(args) -> Payload:
    F = _multivariate(args.poly)
    result = polynomial_service.substitute_matrix(F, args.matrix)
    return {"poly": format_poly(F), "matrix": [list(r) for r in args.matrix.rows], "result": format_poly(result)}


# Cyclotomic

def cmd_cyclo(args) -> Payload:
    f = _univariate(args.poly)
    factorization = cyclotomic_service.is_cyclotomic_product(f)
    return {
        "poly": format_poly(f),
        "is_cyclotomic_product": factorization.is_cyclotomic_product,
        "factorization": factorization.to_json(),
    }


def cmd_phi_one(args) -> Payload:
    return {"m": args.m, "phi_at_one": cyclotomic_service.phi_at_one(args.m)}


def cmd_mann(args) -> Payload:
    return {"k": args.k, "orders": cyclotomic_service.mann_orders(args.k)}


def cmd_mann_audit(args) -> Payload:
    f = _univariate(args.poly)
    audit = cyclotomic_service.mann_audit(f)
    return {"poly": format_poly(f), "consistent": audit.consistent, **audit.model_dump(mode="json")}


def cmd_subsums(args) -> Payload:
    f = _univariate(args.poly)
    subsets = cyclotomic_service.subsum_divisibility(f, args.q)
    return {"poly": format_poly(f), "q": args.q, "subsets": [list(s) for s in subsets], "minimal": not subsets}


# Bounds

def _bound_payload(report) -> Payload:
    payload = report.model_dump(mode="json")
    payload.update({
        "lower_bound": math.exp(report.lower_bound_log),
        "upper_bound": math.exp(report.upper_bound_log),
        "m": report.measured_log,
        "M": math.exp(report.measured_log),
        "reduction_steps": report.reduction_steps,
    })
    return payload


def cmd_verify_bound(args) -> Payload:
    f = _univariate(args.poly)
    return {"poly": format_poly(f), **_bound_payload(bounds_service.verify_theorem1(f, args.tol))}


def cmd_proof_chain(args) -> Payload:
    f = _univariate(args.poly)
    z_power, stripped = polynomial_service.strip_trivial(f)
    chain = bounds_service.proof_chain(stripped)
    return {
        "poly": format_poly(f),
        "z_power": z_power,
        "chain": [step.model_dump(mode="json") for step in chain],
    }


def cmd_corollary2(args) -> Payload:
    F = _multivariate(args.poly)
    report = bounds_service.verify_corollary2(F, budget=args.budget, seed=args.seed)
    payload = report.model_dump(mode="json")
    payload["satisfied"] = report.satisfied
    payload["qmc"] = _estimate(report.qmc)
    return {"poly": format_poly(F), **payload}


def cmd_gap(args) -> Payload:
    return bounds_service.gap_lower_bound(args.k).model_dump(mode="json")


def cmd_extremal(args) -> Payload:
    ratio = bounds_service.extremal_ratio(args.k)
    observed = bounds_service.extremal_observed_ratio(args.k)
    return {
        "k": args.k,
        "extremal_ratio": str(ratio),
        "extremal_ratio_value": float(ratio),
        "observed_ratio": str(observed),
        "observed_ratio_value": float(observed),
    }


def cmd_caps(args) -> Payload:
    return bounds_service.formula_sheet(args.k, args.b).model_dump(mode="json")


# Census

def _records_payload(records, out: Optional[str]) -> Payload:
    members = [r.exponents for r in records if r.kind in (CensusKind.SC_MEMBER, CensusKind.COEFF_CENSUS_HIT)]
    payload: Payload = {"count": len(records), "members": members}
    if out:
        payload["out"] = out
    else:
        payload["records"] = [r.model_dump(mode="json") for r in records]
    return payload


def cmd_search_sc(args) -> Payload:
    index, count = args.shard
    config = SearchConfig(
        k=args.k, max_degree=args.max_degree, shard_index=index, shard_count=count, output_path=args.out
    )
    store = RecordStore(args.out) if args.out else None
    records = list(census_service.search_Sc(config, store=store, resume=args.resume, threads=args.threads))
    return {"config_hash": config.config_hash(), **_records_payload(records, args.out)}


def cmd_census_coeffs(args) -> Payload:
    store = RecordStore(args.out) if args.out else None
    records = list(census_service.coefficient_census(
        args.k, args.coeff_bound, args.max_exponent, store=store, threads=args.threads
    ))
    payload = _records_payload(records, args.out)
    payload["hits"] = [r.coefficients for r in records]
    payload["witnesses"] = [r.exponents for r in records]
    return payload


def cmd_construct(args) -> Payload:
    record = census_service.composite_construction(args.s, args.t, args.m, args.l)
    return {"poly": format_poly(record.polynomial()), **record.model_dump(mode="json")}


def cmd_isolation(args) -> Payload:
    report = census_service.isolation_scan(args.max_degree)
    return {"isolated": report.isolated, **report.model_dump(mode="json")}


def cmd_stability(args) -> Payload:
    report = census_service.stability_report(args.k, args.degrees, threads=args.threads)
    return {"stable": report.stable, **report.model_dump(mode="json")}


# Parser

_SUBCOMMANDS = [
    # name, handler, help, output schema, argument adders
    ("measure", cmd_measure, "univariate Mahler measure",
     "{poly, m, M, method, error_bound, points?, skipped_points?}",
     [("poly", {}), ("--method", {"choices": ["auto", "roots", "quad"], "default": "auto"}),
      ("--points", {"type": _positive_int})]),
    ("measure-multi", cmd_measure_multi, "torus QMC estimate of a Laurent polynomial",
     "{poly, m, M, method, error_bound, points, skipped_points}",
     [("poly", {}), ("--budget", {"type": _positive_int, "default": settings.QMC_BUDGET})]),
    ("restrict", cmd_restrict, "restriction F(z, z^n, ..., z^{n^(l-1)})",
     "{poly, n, restriction, degree, height_preserved, term_count_preserved}",
     [("poly", {}), ("--n", {"type": _positive_int, "required": True})]),
    ("boyd-lawton", cmd_boyd_lawton, "measures along the restriction sequence",
     "{poly, rows: [{n, degree, height_preserved, m, M, method, error_bound}]}; csv: n,m_estimate,error_bound,height_preserved",
     [("poly", {}), ("--ns", {"type": _usage_type(parse_int_list)})]),
    ("safe-n", cmd_safe_n, "threshold past which restrictions keep all monomials",
     "{poly, threshold, witness, first_safe_n}", [("poly", {})]),
    ("substitute", cmd_substitute, "monomial substitution F(z^A)",
     "{poly, matrix, result}",
     [("poly", {}), ("--matrix", {"type": _usage_type(parse_matrix), "required": True})]),
    ("cyclo", cmd_cyclo, "cyclotomic factorization by trial division",
     "{poly, is_cyclotomic_product, factorization: {sign, z_power, factors: [{n, mult}], remainder_terms}}",
     [("poly", {})]),
    ("phi-one", cmd_phi_one, "value of the m-th cyclotomic polynomial at 1",
     "{m, phi_at_one}", [("--m", {"type": int, "required": True})]),
    ("mann", cmd_mann, "squarefree orders built from primes <= k",
     "{k, orders}", [("--k", {"type": int, "required": True})]),
    ("mann-audit", cmd_mann_audit, "order check for every cyclotomic divisor",
     "{poly, k, consistent, entries: [{q, mult, minimal, root_order, in_mann_orders}]}", [("poly", {})]),
    ("subsums", cmd_subsums, "proper subsums divisible by the q-th cyclotomic polynomial",
     "{poly, q, subsets, minimal}",
     [("poly", {}), ("--q", {"type": _positive_int, "required": True})]),
    ("verify-bound", cmd_verify_bound, "check h/2^(k-2) <= M <= k h with its proof chain",
     "{poly, k, height, lower_bound_log, lower_bound, upper_bound_log, upper_bound, m, M, satisfied, "
     "within_upper_bound, chain_verified, reduction_steps, chain: [{step, poly, poly_text, measured_log}]}",
     [("poly", {}), ("--tol", {"type": float, "default": settings.BOUND_TOL})]),
    ("proof-chain", cmd_proof_chain, "derivative reduction chain down to a binomial",
     "{poly, z_power, chain: [{step, poly, poly_text}]}", [("poly", {})]),
    ("corollary2", cmd_corollary2, "multivariate lower bound via restriction and QMC",
     "{poly, k, height, n, restriction, height_preserved, term_count_preserved, lower_bound_log, "
     "restriction_report, qmc, qmc_satisfied, satisfied}",
     [("poly", {}), ("--budget", {"type": _positive_int, "default": settings.QMC_BUDGET})]),
    ("gap", cmd_gap, "explicit isolation gap for k-nomials",
     "{k, exponent, value}", [("--k", {"type": int, "required": True})]),
    ("extremal", cmd_extremal, "extremal ratio M/h for k-nomials",
     "{k, extremal_ratio, extremal_ratio_value, observed_ratio, observed_ratio_value}",
     [("--k", {"type": int, "required": True})]),
    ("caps", cmd_caps, "height and coefficient-tuple caps",
     "{k, extremal_ratio, extremal_observed_ratio, height_cap, tuple_count_cap, gap, "
     "theorem2_height_cap, theorem2_coefficient_tuples}",
     [("--k", {"type": int, "required": True}), ("--b", {"type": float})]),
    ("search-sc", cmd_search_sc, "classify unit k-nomials z^n1 + ... + 1",
     "{config_hash, count, members, out? | records?}; records: "
     "{kind, k, exponents, coefficients, factors, remainder_terms, m_value, provenance, config_hash}",
     [("--k", {"type": int, "required": True}), ("--max-degree", {"type": int, "required": True}),
      ("--shard", {"type": _usage_type(parse_shard), "default": (0, 1)}), ("--out", {}),
      ("--resume", {"action": "store_true"})]),
    ("census-coeffs", cmd_census_coeffs, "coefficient tuples admitting M = 1",
     "{count, members, hits, witnesses, out? | records?}",
     [("--k", {"type": int, "required": True}), ("--coeff-bound", {"type": _positive_int, "required": True}),
      ("--max-exponent", {"type": _positive_int, "required": True}), ("--out", {})]),
    ("construct", cmd_construct, "composite-k member g(z^m) h(z^l)",
     "{poly, kind, k, exponents, coefficients, factors, remainder_terms, m_value, provenance, config_hash}",
     [("--s", {"type": int, "required": True}), ("--t", {"type": int, "required": True}),
      ("--m", {"type": int, "required": True}), ("--l", {"type": int, "required": True})]),
    ("isolation", cmd_isolation, "exact versus numeric classification of 1 ± z^b ± z^a",
     "{max_degree, cases, cyclotomic_count, disagreements, min_mahler, min_witness, gap_bound, isolated}",
     [("--max-degree", {"type": int, "required": True})]),
    ("stability", cmd_stability, "S_c member counts on nested degree slices",
     "{k, k_is_prime, rows: [{max_degree, member_count}], largest_member_degree, stable}",
     [("--k", {"type": int, "required": True}),
      ("--degrees", {"type": _usage_type(parse_int_list), "required": True})]),
]


def _common_flags(parser: argparse.ArgumentParser, defaults: bool) -> None:
    suppress = {} if defaults else {"default": argparse.SUPPRESS}
    parser.add_argument("--format", choices=["json", "csv", "text"],
                        **({"default": "json"} if defaults else suppress))
    parser.add_argument("--threads", type=_positive_int,
                        **({"default": settings.THREADS} if defaults else suppress))
    parser.add_argument("--seed", type=int, **({"default": settings.QMC_SEED} if defaults else suppress))
    parser.add_argument("--verbose", action="store_true", **({} if defaults else suppress))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparse-mahler", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    _common_flags(parser, defaults=True)
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, handler, help_text, schema, arguments in _SUBCOMMANDS:
        sub = subparsers.add_parser(name, help=help_text, description=help_text,
                                    epilog=f"output schema: {schema}")
        _common_flags(sub, defaults=False)
        for flag, options in arguments:
            sub.add_argument(flag, **options)
        sub.set_defaults(handler=handler)
    return parser


def _render(payload: Payload, output_format: str) -> str:
    csv_text = payload.pop("_csv", None)
    if output_format == "csv":
        if csv_text is not None:
            return csv_text.rstrip("\n")
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key, value in sorted(with_schema(payload).items()):
            writer.writerow([key, json.dumps(value, sort_keys=True) if isinstance(value, (dict, list)) else value])
        return buffer.getvalue().rstrip("\n")
    if output_format == "text":
        return "\n".join(
            f"{key}: {json.dumps(value, sort_keys=True, ensure_ascii=False) if isinstance(value, (dict, list)) else value}"
            for key, value in sorted(with_schema(payload).items())
        )
    return dump_json(payload)


def run(argv: Optional[List[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2

    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else settings.LOG_LEVEL,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        payload = args.handler(args)
    except SparseMahlerError as e:
        logger.error(f"{args.command} failed: {e.message}")
        stderr.write(json.dumps(with_schema({"error": e.to_dict()}), sort_keys=True, ensure_ascii=False) + "\n")
        return 1
    except ValidationError as e:
        error = InvalidArgumentError(str(e.errors()[0]["msg"]))
        stderr.write(json.dumps(with_schema({"error": error.to_dict()}), sort_keys=True, ensure_ascii=False) + "\n")
        return 2
    stdout.write(_render(payload, args.format) + "\n")
    return 0


def main() -> None:
    sys.exit(run())
