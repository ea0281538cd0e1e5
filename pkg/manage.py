#!/usr/bin/env python
"""Entry point for the multilinear solvers: `python manage.py <command>`."""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the packages in requirements.txt "
            "(pip install -r requirements.txt) and try again."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
