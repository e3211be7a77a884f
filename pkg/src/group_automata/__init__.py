from __future__ import annotations

import importlib.metadata

try:
    __version__ = importlib.metadata.version("group-automata")
except importlib.metadata.PackageNotFoundError:  # pragma: no cover
    # editable install
    __version__ = "0.0.0"
