"""
Recovery services.

Orchestration on top of the numerical modules: claim reproduction, sweeps,
scenario files and the task layer shared with the management commands.
"""
from .reproduce import ReproduceService, ReproReport, list_claims, reproduce_suite, run_claim
from .scenario import ScenarioService
from .sweep import sweep, sweep_cell, write_sweep_csv
from .tasks import EXIT_ERROR, EXIT_FAILURE, EXIT_OK, RecoveryTasks, TaskResult

__all__ = [
    'ReproduceService', 'ReproReport', 'list_claims', 'reproduce_suite', 'run_claim',
    'ScenarioService',
    'sweep', 'sweep_cell', 'write_sweep_csv',
    'EXIT_ERROR', 'EXIT_FAILURE', 'EXIT_OK', 'RecoveryTasks', 'TaskResult',
]
