"""Exact constructors and verifiers for differential-calculus bialgebroids."""

__version__ = "0.1.0"
