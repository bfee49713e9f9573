"""
Adaptive-submodular cover analysis - command-line entry point.

    python asc.py greedy --builtin paper --priority c,a,b,d
    python asc.py check --instance gap.json --grid 9
"""

import sys
from pathlib import Path

# Add src directory to path for imports
src_path = Path(__file__).parent / "src"
sys.path.insert(0, str(src_path))

from cli import run


if __name__ == "__main__":
    raise SystemExit(run(sys.argv[1:]))
