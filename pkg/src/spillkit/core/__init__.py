"""
Core functionality for spillkit.

This module contains the exception hierarchy, shared types, numerical helpers
and logging setup used by every other subpackage.
"""
