from concurrent.futures import ProcessPoolExecutor
from functools import reduce
from itertools import islice, product
from math import factorial, gcd
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple
import hashlib
import json
import logging
import math

from sympy import isprime

from app.config import settings
from app.models.census import (
    CensusKind,
    CensusRecord,
    ExponentTuple,
    IsolationReport,
    Provenance,
    SearchConfig,
    StabilityReport,
    StabilityRow,
)
from app.models.polynomial import UnivariateIntPoly
from app.services.bounds_service import bounds_service
from app.services.cyclotomic_service import cyclotomic_service
from app.services.polynomial_service import polynomial_service
from app.services.roots_measure_service import roots_measure_service
from app.utils.errors import ConstructionPreconditionError, InvalidArgumentError
from app.utils.record_store import RecordStore

logger = logging.getLogger(__name__)

_BATCH = 4096
_KRONECKER_TOL = 1e-9


def _decreasing(max_exclusive: int, length: int) -> Iterator[Tuple[int, ...]]:
    """Strictly decreasing positive tuples below max_exclusive, lexicographically"""
    if length == 0:
        yield ()
        return
    for first in range(length, max_exclusive):
        for rest in _decreasing(first, length - 1):
            yield (first,) + rest


def _batched(items: Iterable, size: int) -> Iterator[list]:
    iterator = iter(items)
    while True:
        batch = list(islice(iterator, size))
        if not batch:
            return
        yield batch


def _ordered_map(function, items: Iterable, threads: int) -> Iterator:
    """map() in input order, across worker processes when threads > 1"""
    if threads <= 1:
        yield from map(function, items)
        return
    with ProcessPoolExecutor(max_workers=threads) as pool:
        for batch in _batched(items, _BATCH):
            yield from pool.map(function, batch, chunksize=64)


def _measure_log(f: UnivariateIntPoly) -> float:
    return roots_measure_service.mahler_measure(f).log_value


def _classify_exponents(job: Tuple[Tuple[int, ...], str]) -> CensusRecord:
    entries, config_hash = job
    k = len(entries) + 1
    f = ExponentTuple(entries=entries).unit_polynomial()
    m_value = _measure_log(f)
    factorization = None
    kind = CensusKind.SC_NONMEMBER
    reciprocal = polynomial_service.reciprocal(f)
    if reciprocal.terms == f.terms and m_value <= math.log(settings.CYCLO_PREFILTER_M):
        factorization = cyclotomic_service.is_cyclotomic_product(f)
        if factorization.is_cyclotomic_product:
            kind = CensusKind.SC_MEMBER
    extra = {}
    if isprime(k):
        check = cyclotomic_service.prime_power_divisor_check(f)
        extra = {"phi_p_divides": check.divisible_by_phi_p, "f_at_one": check.f_at_one}
    return CensusRecord.from_factorization(
        kind,
        factorization,
        k=k,
        exponents=list(entries),
        coefficients=[1] * k,
        m_value=m_value,
        config_hash=config_hash,
        **extra,
    )


def _palindromic_exponents(entries: Tuple[int, ...]) -> bool:
    full = entries + (0,)
    top = full[0]
    return all(a + b == top for a, b in zip(full, reversed(full)))


def _canonical_coefficients(coefficients: Tuple[int, ...]) -> bool:
    negated = tuple(-c for c in coefficients)
    reversed_ = coefficients[::-1]
    return coefficients == max(coefficients, negated, reversed_, tuple(-c for c in reversed_))


def _coefficients_can_be_kronecker(coefficients: Tuple[int, ...]) -> bool:
    """Exact necessary conditions for ±z^j prod Φ_n with these coefficients"""
    k = len(coefficients)
    if abs(coefficients[0]) != 1 or abs(coefficients[-1]) != 1:
        return False
    if max(abs(c) for c in coefficients) > 2 ** max(k - 2, 0):
        return False
    reversed_ = coefficients[::-1]
    return reversed_ == coefficients or reversed_ == tuple(-c for c in coefficients)


def _census_coefficients(job: Tuple[Tuple[int, ...], int, str]) -> Optional[CensusRecord]:
    coefficients, max_exponent, config_hash = job
    k = len(coefficients)
    if not _coefficients_can_be_kronecker(coefficients):
        return None
    for entries in CensusService.enumerate_S(k, max_exponent):
        if not _palindromic_exponents(entries):
            continue
        f = UnivariateIntPoly.knomial(list(coefficients), list(entries))
        if cyclotomic_service.is_kronecker(f):
            factorization = cyclotomic_service.is_cyclotomic_product(f)
            return CensusRecord.from_factorization(
                CensusKind.COEFF_CENSUS_HIT,
                factorization,
                k=k,
                exponents=list(entries),
                coefficients=list(coefficients),
                m_value=_measure_log(f),
                config_hash=config_hash,
            )
    return None


class CensusService:
    """Bounded searches for M = 1 among unit k-nomials and small-coefficient k-nomials"""

    def __init__(self):
        self.threads = settings.THREADS

    @staticmethod
    def enumerate_S(k: int, max_degree: int) -> Iterator[Tuple[int, ...]]:
        """All n_1 > ... > n_{k-1} > 0 with n_1 <= max_degree and gcd 1, in lexicographic order"""
        if k < 2:
            raise InvalidArgumentError("k must be at least 2")
        if max_degree < k - 1:
            raise InvalidArgumentError("max_degree must be at least k - 1")
        for entries in _decreasing(max_degree + 1, k - 1):
            if reduce(gcd, entries) == 1:
                yield entries

    def search_Sc(
        self,
        config: SearchConfig,
        store: Optional[RecordStore] = None,
        resume: bool = False,
        threads: Optional[int] = None,
    ) -> Iterator[CensusRecord]:
        """Classify f_n for every tuple of the shard; records are appended to `store` as they stream"""
        threads = self.threads if threads is None else threads
        config_hash = config.config_hash()
        done = store.completed_keys(config_hash) if (store is not None and resume) else set()
        if done:
            logger.info(f"Resuming k={config.k} search; skipping {len(done)} classified tuples")

        jobs = (
            (entries, config_hash)
            for index, entries in enumerate(self.enumerate_S(config.k, config.max_degree))
            if index % config.shard_count == config.shard_index and entries not in done
        )
        logger.info(
            f"Searching S_c for k={config.k}, max_degree={config.max_degree}, "
            f"shard {config.shard_index}/{config.shard_count}"
        )
        members = 0
        for record in _ordered_map(_classify_exponents, jobs, threads):
            if store is not None:
                store.append(record)
            members += record.kind == CensusKind.SC_MEMBER
            yield record
        logger.info(f"S_c search for k={config.k} finished with {members} new members")

    def composite_construction(self, s: int, t: int, m: int, l: int) -> CensusRecord:
        """g(z^m) h(z^l) with g = 1 + ... + z^{s-1}, h = 1 + ... + z^{t-1}"""
        if min(s, t, m, l) < 2:
            raise ConstructionPreconditionError("s, t, m and l must all exceed 1")
        for name, value in (
            ("gcd(m, l)", gcd(m, l)),
            ("gcd(m, t!)", gcd(m, factorial(t))),
            ("gcd(l, s!)", gcd(l, factorial(s))),
        ):
            if value != 1:
                raise ConstructionPreconditionError(f"{name} = {value} ≠ 1")

        g = UnivariateIntPoly.from_terms((m * i, 1) for i in range(s))
        h = UnivariateIntPoly.from_terms((l * i, 1) for i in range(t))
        f = g * h
        k = s * t
        if f.term_count != k or any(c != 1 for c in f.coefficients):
            raise ConstructionPreconditionError(
                f"expansion has {f.term_count} terms with coefficients {set(f.coefficients)}"
            )
        entries = tuple(f.exponents[:-1])
        ExponentTuple(entries=entries)
        factorization = cyclotomic_service.is_cyclotomic_product(f)
        kind = CensusKind.SC_MEMBER if factorization.is_cyclotomic_product else CensusKind.SC_NONMEMBER
        payload = json.dumps({"construction": [s, t, m, l]}, sort_keys=True)
        return CensusRecord.from_factorization(
            kind,
            factorization,
            k=k,
            exponents=list(entries),
            coefficients=[1] * k,
            m_value=_measure_log(f),
            provenance=Provenance.CONSTRUCTION,
            config_hash=hashlib.sha256(payload.encode()).hexdigest()[:16],
        )

    def coefficient_tuples(self, k: int, coeff_bound: int) -> Iterator[Tuple[int, ...]]:
        """Nonzero tuples with |a_i| <= coeff_bound, one per sign/reversal class"""
        values = [v for v in range(-coeff_bound, coeff_bound + 1) if v != 0]
        for coefficients in product(values, repeat=k):
            if _canonical_coefficients(coefficients):
                yield coefficients

    def coefficient_census(
        self,
        k: int,
        coeff_bound: int,
        max_exponent: int,
        store: Optional[RecordStore] = None,
        threads: Optional[int] = None,
    ) -> Iterator[CensusRecord]:
        """Coefficient tuples that admit some exponents <= max_exponent with M = 1"""
        threads = self.threads if threads is None else threads
        config = SearchConfig(search="coeffs", k=k, max_degree=max_exponent, coeff_bound=coeff_bound)
        config_hash = config.config_hash()
        height_cap, _ = bounds_service.corollary1_coeff_cap(k)
        if coeff_bound < height_cap:
            logger.warning(f"coeff_bound {coeff_bound} is below the height cap {height_cap}")
        jobs = ((c, max_exponent, config_hash) for c in self.coefficient_tuples(k, coeff_bound))
        hits = 0
        for record in _ordered_map(_census_coefficients, jobs, threads):
            if record is None:
                continue
            hits += 1
            if store is not None:
                store.append(record)
            yield record
        logger.info(f"coefficient census k={k}, bound {coeff_bound}: {hits} hits")

    def isolation_scan(self, max_degree: int) -> IsolationReport:
        """Classify every 1 ± z^b ± z^a, b < a <= max_degree, exactly and numerically"""
        if max_degree < 2:
            raise InvalidArgumentError("max_degree must be at least 2")
        cases = 0
        cyclotomic = 0
        disagreements: List[str] = []
        min_log: Optional[float] = None
        min_witness = None
        for a in range(2, max_degree + 1):
            for b in range(1, a):
                for sa, sb in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                    f = UnivariateIntPoly.from_terms([(a, sa), (b, sb), (0, 1)])
                    cases += 1
                    exact = cyclotomic_service.is_cyclotomic_product(f).is_cyclotomic_product
                    m_value = _measure_log(f)
                    if exact != (abs(m_value) < _KRONECKER_TOL):
                        disagreements.append(str(f))
                    if exact:
                        cyclotomic += 1
                    elif min_log is None or m_value < min_log:
                        min_log, min_witness = m_value, str(f)
        return IsolationReport(
            max_degree=max_degree,
            cases=cases,
            cyclotomic_count=cyclotomic,
            disagreements=disagreements,
            min_mahler=None if min_log is None else math.exp(min_log),
            min_witness=min_witness,
            gap_bound=bounds_service.gap_lower_bound(3).value,
        )

    def stability_report(
        self, k: int, degrees: Sequence[int], threads: Optional[int] = None
    ) -> StabilityReport:
        """S_c member counts on nested max_degree slices"""
        degrees = sorted(set(degrees))
        if not degrees:
            raise InvalidArgumentError("at least one degree is required")
        config = SearchConfig(k=k, max_degree=degrees[-1])
        member_degrees = [
            record.exponents[0]
            for record in self.search_Sc(config, threads=threads)
            if record.kind == CensusKind.SC_MEMBER
        ]
        rows = [
            StabilityRow(max_degree=d, member_count=sum(1 for n in member_degrees if n <= d))
            for d in degrees
        ]
        return StabilityReport(
            k=k,
            k_is_prime=bool(isprime(k)),
            rows=rows,
            largest_member_degree=max(member_degrees, default=0),
        )


census_service = CensusService()
