"""Acceptance battery: a YAML catalogue of checks, their implementations, matchers and the runner."""

from .runner import SuiteResult, run_suite

__all__ = ["SuiteResult", "run_suite"]
