"""Python bindings for the histcad C++ core."""

from ._core import (
    Document,
    HistcadError,
    analyze,
    build_prompt,
    chamfer_distance,
    execute,
    flatten_hier,
    nlt,
    sample_surface,
    sha256_hex,
    solve,
)

__all__ = [
    "Document",
    "HistcadError",
    "analyze",
    "build_prompt",
    "chamfer_distance",
    "execute",
    "flatten_hier",
    "nlt",
    "sample_surface",
    "sha256_hex",
    "solve",
]
