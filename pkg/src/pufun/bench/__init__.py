"""Benchmark harness: test functions, suites and the ``pubench`` command."""

from .functions import TestFunction, get_function
from .suites import RunReport, run_suite

__all__ = ["RunReport", "TestFunction", "get_function", "run_suite"]
