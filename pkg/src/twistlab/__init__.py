"""Numerical laboratory for twisted group algebras."""

from __future__ import annotations

__version__ = "0.1.0"
