"""
Sparse-recovery certificates from the command line.

Usage:
    python manage.py sparsecert gen --construction equiangular --param k=3 --param g=1 --param b=1 --out A.csv
    python manage.py sparsecert solve --dict A.csv --y y.csv --init-support 0,1 --variant ols
    python manage.py sparsecert check --dict A.csv --cert mu --k 3 --g 1 --b 1
    python manage.py sparsecert relax --dict A.csv --x-star x.csv --Q 3 --p 1
    python manage.py sparsecert reproduce lemma1 eq90-tie --timings
    python manage.py sparsecert sweep --construction equiangular --k 2 3 --g 0 1 --b 0 1
    python manage.py sparsecert scenario scenario.json

Exit status: 0 on pass or success, 1 on a certified failure, 2 on error.
"""
import argparse
import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from recovery.exceptions import RecoveryError
from recovery.linalg import Tolerances
from recovery.management.subcommands import SUBCOMMANDS
from recovery.services import EXIT_ERROR, EXIT_FAILURE

logger = logging.getLogger(__name__)


def global_options() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('--tol-rank', type=float, help='Eigenvalue cutoff for rank decisions')
    parser.add_argument('--tol-tie', type=float, help='Width within which greedy scores tie')
    parser.add_argument('--tol-cert', type=float, help='Width applied to certificate comparisons')
    parser.add_argument('--jobs', type=int, help='Parallel workers for sweeps and claim suites')
    parser.add_argument('--seed', type=int, help='Seed for randomized coefficients and banks')
    parser.add_argument('--out', help='Write the report (CSV for sweep and gen) here instead of stdout')
    return parser


class Command(BaseCommand):
    help = 'Sparse recovery toolkit: gen, solve, check, relax, reproduce, sweep, scenario'

    def add_arguments(self, parser):
        common = global_options()
        subparsers = parser.add_subparsers(dest='subcommand', required=True)
        for name, subcommand in SUBCOMMANDS.items():
            subparser = subparsers.add_parser(name, help=subcommand.help, parents=[common])
            subcommand().add_arguments(subparser)

    def handle(self, *args, **options):
        subcommand = SUBCOMMANDS[options['subcommand']]()
        seed = options['seed'] if options['seed'] is not None else settings.SPARSECERT_SEED
        jobs = options['jobs'] or settings.SPARSECERT_JOBS

        try:
            tol = Tolerances.from_settings(
                rank_tol=options['tol_rank'],
                tie_tol=options['tol_tie'],
                cert_tol=options['tol_cert'],
            )
            result = subcommand.run(self, options, tol, seed, jobs)
            if options['out']:
                subcommand.write(result, options['out'])
                self.stdout.write(f"Wrote {subcommand.name} output to {options['out']}")
            else:
                self.stdout.write(subcommand.render(result))
        except RecoveryError as exc:
            logger.error(f"{subcommand.name} failed: {exc}")
            raise CommandError(f"{type(exc).__name__}: {exc}", returncode=EXIT_ERROR) from exc
        except OSError as exc:
            raise CommandError(f"cannot write output: {exc}", returncode=EXIT_ERROR) from exc

        if result.exit_code == EXIT_FAILURE:
            self.stderr.write(self.style.WARNING(f"{subcommand.name}: certified failure"))
            raise SystemExit(EXIT_FAILURE)
        self.stderr.write(self.style.SUCCESS(f"{subcommand.name}: ok"))
