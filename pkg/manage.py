#!/usr/bin/env python
"""Command-line entry point for the sparsecert toolkit.

Subcommands (gen, solve, check, relax, reproduce, sweep, scenario) run through
``manage.py sparsecert``, provided by the ``recovery`` app.
"""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'sparsecert_project.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the pinned stack with "
            "'pip install -r requirements.txt' inside your virtual environment."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
