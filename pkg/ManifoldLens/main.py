# main.py
# Copyright (c) 2026 ManifoldLens contributors
#
# Console entry point for the manifold-lens command.
"""Console entry point: configure logging, run the CLI, exit with its code."""


import sys
import pathlib

# Support running both as a package (`python -m ManifoldLens.main`)
# and directly as a script (`python ManifoldLens/main.py`).
if __package__:
    from .cli import run
    from .utils import configure_logging
else:  # pragma: no cover - convenience for direct invocation
    sys.path.append(str(pathlib.Path(__file__).resolve().parent.parent))
    from ManifoldLens.cli import run  # type: ignore
    from ManifoldLens.utils import configure_logging  # type: ignore


def main():
    """
    Main function: stderr logging (plus MANIFOLDLENS_LOG_DIR file), then the CLI.
    """
    configure_logging()
    sys.exit(run(sys.argv[1:]))


if __name__ == '__main__':
    main()
