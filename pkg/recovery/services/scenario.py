"""
Scenario files: one JSON document naming a dictionary source and a task.
"""
import json
import logging
from pathlib import Path

from ..exceptions import ScenarioError
from ..linalg import Tolerances
from ..serializers import ScenarioSerializer, validation_message
from .tasks import EXIT_OK, RecoveryTasks, TaskResult, write_dictionary, write_report, write_rows

logger = logging.getLogger(__name__)


class ScenarioService:
    """Load, validate and run scenario files."""

    @staticmethod
    def load(path) -> dict:
        """
        Parse and validate a scenario file.

        Args:
            path: JSON scenario file

        Returns:
            validated scenario dict (seed filled in from SPARSECERT_SEED)

        Raises:
            ScenarioError: missing file, malformed JSON (with line and column) or invalid fields
        """
        path = Path(path)
        if not path.is_file():
            raise ScenarioError(f"scenario file not found: {path}")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise ScenarioError(f"{path}: a scenario must be a JSON object")
        serializer = ScenarioSerializer(data=data)
        if not serializer.is_valid():
            raise ScenarioError(f"{path}: {validation_message(serializer.errors)}")
        return serializer.validated_data

    @staticmethod
    def run(scenario: dict, tol: Tolerances | None = None, jobs: int = 1) -> TaskResult:
        """
        Dispatch a validated scenario to its task.

        Tolerances in the scenario override tol, which defaults to settings.

        Returns:
            TaskResult with exit code 0 (pass) or 1 (certified failure); the
            report also records task and seed
        """
        task = scenario['task']
        params = dict(scenario.get('params') or {})
        seed = scenario['seed']
        source = scenario.get('dictionary')
        overrides = dict(scenario.get('tolerances') or {})
        if tol is None:
            tol = Tolerances.from_settings(**overrides)
        elif overrides:
            tol = Tolerances(**{**vars(tol), **overrides})

        logger.info(f"Running scenario task {task} (seed {seed})")
        D = meta = None
        if task in ('gen', 'solve', 'check', 'relax'):
            D, meta = RecoveryTasks.load_dictionary(source)

        if task == 'gen':
            result = TaskResult(EXIT_OK, RecoveryTasks.describe(D, meta, tol))
        elif task == 'solve':
            result = RecoveryTasks.solve(D, params, seed, tol)
        elif task == 'check':
            result = RecoveryTasks.check(D, params, meta, seed, tol)
        elif task == 'relax':
            result = RecoveryTasks.relax(D, params, tol)
        elif task == 'reproduce':
            result = RecoveryTasks.reproduce(params, seed, tol, jobs, timings=bool(params.get('timings')))
        else:
            result = RecoveryTasks.sweep(params, source, seed, tol, jobs)
        result.report = {'task': task, 'seed': seed, **result.report}

        output = scenario.get('output')
        if output:
            if task == 'gen':
                write_dictionary(output, D, result.report)
            elif task == 'sweep':
                write_rows(output, result.rows)
            else:
                write_report(output, result.report)
            logger.info(f"Wrote {task} output to {output}")
        return result
