"""
Reproduction suite: runs registered claims and optionally records them.
"""
import json
import logging
import time
from dataclasses import dataclass, field

from django.db import transaction
from joblib import Parallel, delayed

from ..exceptions import UnknownClaim
from ..linalg import Tolerances, resolve
from ..serializers import ReproReportSerializer, render_json
from .claims import CLAIMS, Claim, ClaimCheck

logger = logging.getLogger(__name__)


@dataclass
class ReproReport:
    claim_id: str
    checks: list[ClaimCheck] = field(default_factory=list)
    parameters: dict = field(default_factory=dict)
    runtime_s: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(check.passed for check in self.checks)


def list_claims() -> list[Claim]:
    return list(CLAIMS.values())


def run_claim(claim_id: str, seed: int = 0, tol: Tolerances | None = None, overrides: dict | None = None) -> ReproReport:
    """Run one claim with its registered parameters, updated by overrides.

    Raises:
        UnknownClaim: claim_id is not registered
    """
    if claim_id not in CLAIMS:
        raise UnknownClaim(f"unknown claim {claim_id!r}")
    claim = CLAIMS[claim_id]
    parameters = {**claim.defaults, **(overrides or {})}
    tol = resolve(tol)

    started = time.perf_counter()
    checks = claim.runner(tol=tol, seed=seed, **parameters)
    runtime = time.perf_counter() - started

    report = ReproReport(claim_id, checks, {'seed': seed, **parameters}, runtime)
    if report.passed:
        logger.info(f"Claim {claim_id} passed in {runtime:.2f}s")
    else:
        failed = ', '.join(check.name for check in checks if not check.passed)
        logger.warning(f"Claim {claim_id} failed: {failed}")
    return report


def reproduce_suite(
    claims=None,
    seed: int = 0,
    tol: Tolerances | None = None,
    overrides: dict | None = None,
    jobs: int = 1,
) -> list[ReproReport]:
    """Run the named claims (every registered claim when claims is empty).

    Reports come back in request order whatever the number of jobs.

    Args:
        claims: claim ids
        seed: base seed for every randomized bank and draw
        tol: shared tolerances
        overrides: per-claim parameter overrides keyed by claim id
        jobs: parallel workers, one claim per task

    Raises:
        UnknownClaim: any requested id is not registered
    """
    ids = list(claims) if claims else list(CLAIMS)
    unknown = [claim_id for claim_id in ids if claim_id not in CLAIMS]
    if unknown:
        raise UnknownClaim(f"unknown claim(s): {', '.join(unknown)} (see reproduce --list)")
    overrides = overrides or {}
    if jobs == 1 or len(ids) == 1:
        return [run_claim(claim_id, seed, tol, overrides.get(claim_id)) for claim_id in ids]
    return Parallel(n_jobs=jobs, prefer='threads')(
        delayed(run_claim)(claim_id, seed, tol, overrides.get(claim_id)) for claim_id in ids
    )


class ReproduceService:
    """Persistence for reproduction runs."""

    @staticmethod
    @transaction.atomic
    def record(reports: list[ReproReport], seed: int):
        """
        Store each report as a ClaimRun.

        Args:
            reports: results of reproduce_suite
            seed: seed the suite ran with

        Returns:
            list of ClaimRun instances
        """
        from ..models import ClaimRun

        runs = []
        for report in reports:
            payload = json.loads(render_json(ReproReportSerializer(report, context={'timings': True}).data))
            runs.append(ClaimRun.objects.create(
                claim_id=report.claim_id,
                passed=report.passed,
                seed=seed,
                runtime_seconds=report.runtime_s,
                report=payload,
            ))
        logger.info(f"Recorded {len(runs)} claim run(s)")
        return runs
