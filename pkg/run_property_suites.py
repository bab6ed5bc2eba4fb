#!/usr/bin/env python3
"""
Full-size property suites
Runs every acceptance check on its full corpus, prints a summary and exits
nonzero if any check reports a violation. The pytest suite runs the same
checks on reduced corpora.
"""

import math
import os
import sys
import time
import traceback
from fractions import Fraction

import numpy as np

# Add the current directory to Python path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from app.config import settings
from app.models.census import CensusKind, SearchConfig
from app.models.polynomial import UnivariateIntPoly
from app.services.bounds_service import bounds_service
from app.services.census_service import census_service
from app.services.cyclotomic_service import cyclotomic_service
from app.services.multivar_measure_service import multivar_measure_service
from app.services.polynomial_service import polynomial_service
from app.services.roots_measure_service import roots_measure_service
from app.utils.errors import SparseMahlerError
from app.utils.poly_parser import MULTIVARIATE, parse_poly

SEED = 20240611
TOL = 1e-9


def random_knomial(rng, k, max_coeff=100, max_degree=200):
    exponents = sorted(rng.choice(np.arange(1, max_degree + 1), size=k - 1, replace=False).tolist(), reverse=True)
    coefficients = [int(c) * int(rng.choice([-1, 1])) for c in rng.integers(1, max_coeff + 1, size=k)]
    return UnivariateIntPoly.knomial(coefficients, exponents)


def knomial_corpus(size):
    rng = np.random.default_rng(SEED)
    return [random_knomial(rng, int(rng.integers(2, 9))) for _ in range(size)]


def check_binomials():
    rng = np.random.default_rng(SEED + 1)
    violations = []
    for _ in range(1000):
        a1, a2 = (int(a) * int(rng.choice([-1, 1])) for a in rng.integers(1, 10 ** 6 + 1, size=2))
        n = int(rng.integers(1, 10 ** 6 + 1))
        f = UnivariateIntPoly.knomial([a1, a2], [n])
        expected = max(abs(a1), abs(a2))
        measured = roots_measure_service.mahler_measure(f).mahler
        if abs(measured - expected) > 1e-12 * expected:
            violations.append((a1, n, a2, measured))
    return violations


def check_theorem1_and_chains(corpus):
    bound_violations, chain_violations = [], []
    for f in corpus:
        try:
            report = bounds_service.verify_theorem1(f)
        except SparseMahlerError as e:
            bound_violations.append((str(f.terms), e.code))
            chain_violations.append((str(f.terms), e.code))
            continue
        if not (report.satisfied and report.within_upper_bound):
            bound_violations.append(str(f.terms))
        _, stripped = polynomial_service.strip_trivial(f)
        expected_length = max(stripped.term_count - 2, 0)
        if not report.chain_verified or report.reduction_steps != expected_length:
            chain_violations.append(str(f.terms))
    return bound_violations, chain_violations


def check_identities():
    rng = np.random.default_rng(SEED + 2)
    violations = []
    for _ in range(1000):
        f = random_knomial(rng, int(rng.integers(2, 6)), max_coeff=20, max_degree=40)
        g = random_knomial(rng, int(rng.integers(2, 6)), max_coeff=20, max_degree=40)
        m_f = roots_measure_service.mahler_univariate(f).log_value
        m_g = roots_measure_service.mahler_univariate(g).log_value
        m_rec = roots_measure_service.mahler_univariate(polynomial_service.reciprocal(f)).log_value
        m_fg = roots_measure_service.mahler_univariate(f * g).log_value
        if abs(m_f - m_rec) > TOL or abs(m_fg - m_f - m_g) > TOL:
            violations.append((str(f.terms), str(g.terms)))
    return violations


def check_oracles():
    rng = np.random.default_rng(SEED + 3)
    violations, tested = [], 0
    while tested < 200:
        degree = int(rng.integers(1, 51))
        coefficients = [int(c) for c in rng.integers(-20, 21, size=degree + 1)]
        if coefficients[0] == 0 or coefficients[-1] == 0:
            continue
        f = UnivariateIntPoly.from_dense(coefficients)
        moduli = roots_measure_service.find_roots(f).moduli()
        if np.any(np.abs(moduli - 1.0) < 1e-3):
            continue
        tested += 1
        exact = roots_measure_service.mahler_univariate(f).log_value
        grid = roots_measure_service.mahler_quadrature(f, 2 ** 16).log_value
        if abs(exact - grid) > 1e-6:
            violations.append((str(f.terms), exact, grid))
    return violations


def check_isolation():
    report = census_service.isolation_scan(30)
    print(f"  📋 {report.cases} trinomials, {report.cyclotomic_count} cyclotomic, "
          f"min M over the rest {report.min_mahler:.6f}")
    violations = list(report.disagreements)
    if report.min_mahler <= 1 + 1e-6:
        violations.append(("min_mahler", report.min_mahler))
    return violations


def check_boyd_lawton():
    F = parse_poly("1 + x1 + x2", MULTIVARIATE)
    qmc = multivar_measure_service.mahler_qmc(F, budget=2 ** 20, seed=settings.QMC_SEED)
    table = multivar_measure_service.boyd_lawton_sequence(F, [50, 100, 200])
    violations = []
    for row in table.rows:
        limit = 0.01 if row.n == 200 else 0.02
        if abs(row.estimate.log_value - qmc.log_value) > limit or not row.height_preserved:
            violations.append((row.n, row.estimate.log_value, qmc.log_value))
    if multivar_measure_service.safe_substitution_index(F).threshold != 1:
        violations.append("safe substitution index")
    for n in range(2, 40):
        if polynomial_service.height(multivar_measure_service.restrict(F, n)) != 1:
            violations.append(("height", n))
    return violations


def check_census():
    violations = []
    records = list(census_service.search_Sc(SearchConfig(k=5, max_degree=8)))
    found = {
        tuple(r.exponents): [f.n for f in r.factors]
        for r in records if r.kind == CensusKind.SC_MEMBER
    }
    print(f"  📋 k=5 members up to degree 8: {sorted(found)}")
    if found.get((4, 3, 2, 1)) != [5] or found.get((6, 4, 3, 2)) != [5, 6]:
        violations.append(("k=5", found))
    k3 = {tuple(r.exponents) for r in census_service.search_Sc(SearchConfig(k=3, max_degree=50))
          if r.kind == CensusKind.SC_MEMBER}
    if k3 != {(2, 1)}:
        violations.append(("k=3", k3))
    return violations


def check_constructions():
    pairs = [(3, 5), (3, 7), (5, 7), (3, 11), (5, 9), (7, 9), (5, 11), (7, 11), (3, 13), (9, 11)]
    violations = []
    for m, l in pairs:
        record = census_service.composite_construction(2, 2, m, l)
        f = record.polynomial()
        if record.kind != CensusKind.SC_MEMBER or not cyclotomic_service.is_cyclotomic_product(f).is_cyclotomic_product:
            violations.append((m, l))
    return violations


def check_coefficient_census():
    low = {tuple(r.coefficients) for r in census_service.coefficient_census(3, 2, 20)}
    high = {tuple(r.coefficients) for r in census_service.coefficient_census(3, 2, 40)}
    print(f"  📋 {len(low)} coefficient classes admit M = 1")
    violations = []
    if not {(1, 1, 1), (1, -1, 1), (1, 2, 1)} <= low:
        violations.append(("missing", low))
    if low != high:
        violations.append(("unstable", low ^ high))
    return violations


def check_formulas():
    violations = []
    if bounds_service.corollary1_coeff_cap(2) != (1, 9) or bounds_service.corollary1_coeff_cap(3) != (2, 125):
        violations.append("corollary1_coeff_cap")
    if bounds_service.extremal_ratio(4) != Fraction(1, 3):
        violations.append("extremal_ratio")
    for k in range(2, 12):
        independent = 1 + math.exp(-0.785 * 3 ** ((k - 2) // 4) * k ** 2 * math.log(k))
        if abs(bounds_service.gap_lower_bound(k).value - independent) > 1e-12:
            violations.append(("gap", k))
    return violations


def run_suites():
    """Run every suite and return the number of failed ones"""
    corpus = knomial_corpus(10000)
    chains = {}

    def theorem1():
        bounds, chains["violations"] = check_theorem1_and_chains(corpus)
        return bounds

    suites = [
        ("Binomial exactness", check_binomials),
        ("Lower and upper bounds on 10,000 k-nomials", theorem1),
        ("Proof chains", lambda: chains.get("violations", ["bound suite did not finish"])),
        ("Reciprocal invariance and additivity", check_identities),
        ("Roots against quadrature", check_oracles),
        ("Cyclotomic detector against measures", check_isolation),
        ("Restriction sequence convergence", check_boyd_lawton),
        ("Unit k-nomial census", check_census),
        ("Composite constructions", check_constructions),
        ("Coefficient census stability", check_coefficient_census),
        ("Closed-form spot checks", check_formulas),
    ]

    failed = 0
    for name, suite in suites:
        print(f"\n🔄 {name}...")
        started = time.perf_counter()
        try:
            violations = suite()
        except Exception as e:
            print(f"  ❌ Error: {str(e)}")
            traceback.print_exc()
            failed += 1
            continue
        elapsed = time.perf_counter() - started
        if violations:
            failed += 1
            print(f"  ❌ {len(violations)} violations ({elapsed:.1f}s)")
            for violation in violations[:5]:
                print(f"     {violation}")
        else:
            print(f"  ✅ passed ({elapsed:.1f}s)")

    print(f"\n📊 Summary: {len(suites) - failed}/{len(suites)} suites passed")
    return failed


if __name__ == "__main__":
    print("🚀 Starting property suites...")
    sys.exit(1 if run_suites() else 0)
