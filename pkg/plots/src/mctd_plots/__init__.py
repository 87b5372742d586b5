"""Rendering scripts for the estimation CLI's CSV/JSON outputs.

These scripts never recompute statistics; they draw exactly what the
estimation pipeline emitted.
"""

__version__ = "1.0.0"
