"""Preference and functional dependence logics: syntax, models, decision and game analysis."""

__version__ = "0.1.0"
