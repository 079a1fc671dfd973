# TableGen CLI Module
"""
Command-line entry point, layered settings, run manifests and the
generation worker pool.
"""

from .main import build_parser, main, run
from .manifest import RunManifest
from .settings import RunSettings, resolve_settings
from .workers import generate_all

__all__ = ["RunManifest", "RunSettings", "build_parser", "generate_all", "main", "resolve_settings", "run"]
