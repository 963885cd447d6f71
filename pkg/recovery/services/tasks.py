"""
Task entry points shared by the management commands and scenario files.

Each task returns a TaskResult whose exit code follows the command-line
contract: 0 on pass or success, 1 on a certified failure.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..conditions import (
    Bound,
    ConditionReport,
    analytic_bound,
    partial_erc,
    prip,
    projected_coherence,
    ric,
    theta_nsp,
    theta_oxx,
)
from ..dictionary import Construction, Dictionary, GeneratorMetadata, Variant, build, generate, mutual_coherence
from ..exceptions import InvalidParams
from ..greedy import GreedyConfig, TiePolicy, run, success
from ..linalg import Tolerances, resolve
from ..matrix_io import read_matrix, read_vector, write_matrix
from ..relax import SparseVector, VerdictStatus, solve_p0_informed, verify_lp_minimizer
from ..serializers import (
    ConditionReportSerializer,
    GeneratorMetadataSerializer,
    GreedyTraceSerializer,
    MinimizerVerdictSerializer,
    P0SolutionSerializer,
    ReproReportSerializer,
    parse_support,
    render_json,
)
from .banks import draw_coefficients
from .reproduce import reproduce_suite
from .sweep import sweep, write_sweep_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_ERROR = 2

CERTIFICATES = ['mu', 'spark', 'erc', 'theta-oxx', 'theta-nsp', 'ric', 'prip', 'proj-coherence', 'bounds']
TIE_ALIASES = {'lex': TiePolicy.LEXICOGRAPHIC, 'lexicographic': TiePolicy.LEXICOGRAPHIC,
               'adversarial': TiePolicy.ADVERSARIAL}


@dataclass
class TaskResult:
    exit_code: int
    report: dict
    rows: list = field(default_factory=list)


def _vector(value, name: str) -> np.ndarray:
    """A vector given inline as a list or as a CSV path."""
    if value is None:
        raise InvalidParams(f"{name} is required")
    if isinstance(value, str):
        return read_vector(value)
    vector = np.asarray(value, dtype=float).ravel()
    if not np.all(np.isfinite(vector)):
        raise InvalidParams(f"{name} contains NaN or infinite entries")
    return vector


def _integer(params: dict, name: str, fallback=None) -> int:
    value = params.get(name, fallback)
    if value is None:
        raise InvalidParams(f"{name} is required")
    try:
        return int(value)
    except (TypeError, ValueError):
        raise InvalidParams(f"{name} must be an integer (got {value!r})") from None


def _tie_policy(value) -> TiePolicy:
    try:
        return TIE_ALIASES[str(value)]
    except KeyError:
        raise InvalidParams(f"unknown tie policy {value!r} (choose adversarial or lex)") from None


def _variant(value) -> Variant:
    try:
        return Variant(value)
    except ValueError:
        raise InvalidParams(f"unknown variant {value!r} (choose omp or ols)") from None


class RecoveryTasks:
    """gen, solve, check, relax, reproduce and sweep as plain functions of parsed parameters."""

    @staticmethod
    def load_dictionary(source: dict) -> tuple[Dictionary, GeneratorMetadata | None]:
        """
        Build the dictionary named by a source mapping.

        Args:
            source: {"path": csv} or {"construction": name, "params": {...}},
                with an optional "normalize" flag for CSV input

        Returns:
            (dictionary, metadata); metadata is None for CSV input

        Raises:
            InvalidParams, NotNormalized, ZeroColumn: invalid matrix or generator parameters
        """
        if source.get('path'):
            D = build(read_matrix(source['path']), normalize=bool(source.get('normalize')))
            logger.info(f"Loaded {D!r} from {source['path']}")
            return D, None
        return generate(source['construction'], **dict(source.get('params') or {}))

    @staticmethod
    def describe(D: Dictionary, meta: GeneratorMetadata | None, tol: Tolerances | None = None) -> dict:
        """Sidecar metadata: construction, params, mu, spark, kernel_dim and canonical supports."""
        tol = resolve(tol)
        if meta is None:
            meta = GeneratorMetadata('file', {})
            meta.mu = mutual_coherence(D) if D.n >= 2 else 0.0
        report = dict(GeneratorMetadataSerializer(meta).data)
        report.update(m=D.m, n=D.n, spark=D.spark(tol), kernel_dim=int(D.kernel(tol).shape[1]))
        return report

    @staticmethod
    def solve(D: Dictionary, params: dict, seed: int = 0, tol: Tolerances | None = None) -> TaskResult:
        """
        Run OMP_Q or OLS_Q.

        Args:
            params: y (list or CSV path), init_support, variant, ties,
                true_support, max_iterations. Without y, coefficients are
                drawn on true_support from the seed.

        Returns:
            TaskResult; exit code 1 when true_support is given and not recovered
        """
        tol = resolve(tol)
        q_init = parse_support(params.get('init_support') or [], D.n)
        q_star = params.get('true_support')
        q_star = parse_support(q_star, D.n) if q_star is not None else None
        if params.get('y') is None and q_star is not None:
            x = np.zeros(D.n)
            x[list(q_star)] = draw_coefficients(np.random.default_rng(seed), len(q_star))
            y = D.atoms @ x
        else:
            y = _vector(params.get('y'), 'y')
        config = GreedyConfig(
            variant=_variant(params.get('variant', 'omp')),
            tie_policy=_tie_policy(params.get('ties', 'adversarial')),
            tie_tol=tol.tie_tol,
            max_iterations=params.get('max_iterations'),
        )
        trace = run(D, y, q_init, config, q_star, tol)
        report = {'trace': GreedyTraceSerializer(trace).data, 'y': y.tolist(), 'success': None}
        exit_code = EXIT_OK
        if q_star is not None:
            report['success'] = success(trace, q_star, q_init)
            exit_code = EXIT_OK if report['success'] else EXIT_FAILURE
        return TaskResult(exit_code, report)

    @staticmethod
    def certificate(D: Dictionary, cert: str, params: dict, meta: GeneratorMetadata | None = None,
                    seed: int = 0, tol: Tolerances | None = None) -> list[ConditionReport]:
        """
        Evaluate one certificate.

        k, g and b fall back to the generator metadata when not given;
        erc needs Qstar and Q.

        Raises:
            InvalidParams: unknown certificate or missing parameter
        """
        tol = resolve(tol)
        if cert not in CERTIFICATES:
            raise InvalidParams(f"unknown certificate {cert!r} (choose from {', '.join(CERTIFICATES)})")
        cert_tol = tol.cert_tol
        k = _integer(params, 'k', getattr(meta, 'k', None)) if cert not in ('bounds', 'erc') else None
        g = _integer(params, 'g', getattr(meta, 'g', None) or 0) if k is not None else None
        b = _integer(params, 'b', getattr(meta, 'b', None) or 0) if k is not None else None
        variant = _variant(params.get('variant', 'omp'))

        if cert == 'mu':
            return [analytic_bound(Bound.COHERENCE_MAIN, k=k, g=g, b=b, mu=mutual_coherence(D), cert_tol=cert_tol)]
        if cert == 'spark':
            return [analytic_bound(Bound.SPARK_OLS_KMINUS1, k=k, b=b, spark=D.spark(tol), cert_tol=cert_tol)]
        if cert == 'erc':
            q_star = parse_support(params.get('Qstar', params.get('q_star')), D.n)
            q = parse_support(params.get('Q', params.get('q')) or [], D.n)
            value = partial_erc(D, q_star, q, variant, tol)
            return [ConditionReport(f"erc_{variant.value}", value, 1.0, cert_tol=cert_tol,
                                    context={'Qstar': list(q_star), 'Q': list(q)})]
        if cert == 'theta-oxx':
            value = theta_oxx(D, k, g, b, variant, tol)
            return [ConditionReport(f"theta_{variant.value}", value, 1.0, cert_tol=cert_tol,
                                    context={'k': k, 'g': g, 'b': b})]
        if cert == 'theta-nsp':
            p = float(params.get('p', 1.0))
            result = theta_nsp(D, k, g, b, p, tol, seed)
            return [ConditionReport("theta_p", result.value, 1.0, exact=result.exact, cert_tol=cert_tol,
                                    context={'k': k, 'g': g, 'b': b, 'p': p},
                                    notes={'kernel_dim': result.kernel_dim, 'trivial_kernel': result.trivial_kernel})]
        if cert == 'ric':
            order = _integer(params, 'order', k + b + 1)
            delta = ric(D, order, tol)
            reports = [analytic_bound(Bound.RIC_OMP_INFORMED, k=k, g=g, b=b, delta=delta, cert_tol=cert_tol)]
            if g == 0 and b == 0:
                reports.append(analytic_bound(Bound.RIC_OMP_CLASSIC, k=k, delta=delta, cert_tol=cert_tol))
            for report in reports:
                report.context['order'] = order
            return reports
        if cert == 'prip':
            q_size = _integer(params, 'q_size', k - g)
            l = _integer(params, 'l', g + b)
            constants = prip(D, q_size, l, tol)
            return [ConditionReport('prip_delta_low', constants.delta_low, 1.0, cert_tol=cert_tol,
                                    context={'q': q_size, 'l': l, 'delta_up': constants.delta_up})]
        if cert == 'proj-coherence':
            l = _integer(params, 'l', g + b)
            value = projected_coherence(D, l, variant, tol)
            if variant is Variant.OLS:
                report = analytic_bound(Bound.PROP2_OLS, mu_ols=value, k=k, g=g, cert_tol=cert_tol)
                report.context['l'] = l
                return [report]
            return [ConditionReport('projected_coherence_omp', value, 1.0 / (2 * k - 2 * g - 1),
                                    cert_tol=cert_tol, context={'k': k, 'g': g, 'l': l})]
        if cert == 'bounds':
            name = params.get('bound')
            if not name:
                raise InvalidParams('bounds needs a bound name')
            values = dict(params.get('values') or {})
            values.setdefault('cert_tol', cert_tol)
            return [analytic_bound(name, **values)]
        raise InvalidParams(f"unknown certificate {cert!r} (choose from {', '.join(CERTIFICATES)})")

    @staticmethod
    def check(D: Dictionary, params: dict, meta: GeneratorMetadata | None = None,
              seed: int = 0, tol: Tolerances | None = None) -> TaskResult:
        """Evaluate params["cert"] (a name or list of names); exit 1 if any report is unsatisfied."""
        certs = params.get('cert', 'mu')
        certs = [certs] if isinstance(certs, str) else list(certs)
        reports = []
        for cert in certs:
            reports.extend(RecoveryTasks.certificate(D, cert, params, meta, seed, tol))
        exit_code = EXIT_OK if all(report.satisfied for report in reports) else EXIT_FAILURE
        return TaskResult(exit_code, {'reports': ConditionReportSerializer(reports, many=True).data})

    @staticmethod
    def relax(D: Dictionary, params: dict, tol: Tolerances | None = None) -> TaskResult:
        """
        Verify x_star for the informed lp problem.

        Without x_star, y is required and the informed l0 problem is solved
        first; its first minimal solution is verified.

        Returns:
            TaskResult; exit code 0 only for unique_minimizer
        """
        tol = resolve(tol)
        q = parse_support(params.get('Q', params.get('q')) or [], D.n)
        p = float(params.get('p', 1.0))
        report = {'p0': None}
        if params.get('x_star') is not None:
            x_star = SparseVector(_vector(params['x_star'], 'x_star'), tol.rank_tol)
        else:
            solution = solve_p0_informed(D, _vector(params.get('y'), 'y'), q, params.get('max_extra'), tol)
            report['p0'] = P0SolutionSerializer(solution).data
            x_star = solution.solutions[0]
        verdict = verify_lp_minimizer(D, x_star, q, p, tol)
        report['verdict'] = MinimizerVerdictSerializer(verdict).data
        report['x_star'] = x_star.entries.tolist()
        exit_code = EXIT_OK if verdict.status is VerdictStatus.UNIQUE_MINIMIZER else EXIT_FAILURE
        return TaskResult(exit_code, report)

    @staticmethod
    def reproduce(params: dict, seed: int = 0, tol: Tolerances | None = None, jobs: int = 1,
                  timings: bool = False) -> TaskResult:
        """Run claims; exit 1 when any claim fails."""
        claims = params.get('claims') or []
        claims = [claims] if isinstance(claims, str) else list(claims)
        reports = reproduce_suite(claims, seed, tol, params.get('overrides'), jobs)
        data = ReproReportSerializer(reports, many=True, context={'timings': timings}).data
        exit_code = EXIT_OK if all(report.passed for report in reports) else EXIT_FAILURE
        return TaskResult(exit_code, {'claims': data, 'passed': exit_code == EXIT_OK}, rows=reports)

    @staticmethod
    def sweep(params: dict, source: dict | None = None, seed: int = 0, tol: Tolerances | None = None,
              jobs: int = 1) -> TaskResult:
        """Sweep a construction over k, g and b lists; rows go to CSV."""
        source = source or {}
        construction = params.get('construction') or source.get('construction')
        try:
            construction = Construction(construction)
        except ValueError:
            raise InvalidParams(f"sweep needs a known construction (got {construction!r})") from None
        rows = sweep(
            construction,
            params.get('k', [2]), params.get('g', [0]), params.get('b', [0]),
            params.get('params') or source.get('params'),
            seed=seed, draws=int(params.get('draws', 1)), tol=tol, jobs=jobs,
        )
        return TaskResult(EXIT_OK, {'cells': len(rows)}, rows=rows)


def write_report(path, report) -> Path:
    path = Path(path)
    path.write_text(render_json(report) + '\n')
    return path


def write_rows(path, rows: list[dict]) -> Path:
    path = Path(path)
    with path.open('w', newline='') as stream:
        write_sweep_csv(rows, stream)
    return path


def write_dictionary(path, D: Dictionary, description: dict) -> tuple[Path, Path]:
    """Write the atoms as CSV and the description to a .json sidecar next to it."""
    matrix_path = write_matrix(path, D.atoms)
    return matrix_path, write_report(Path(path).with_suffix('.json'), description)
