"""Run the acceptance suite and print one line per criterion.

    python3 scripts/run_acceptance.py [extra pytest args]
"""
from __future__ import annotations

import sys
from pathlib import Path

import pytest

if __name__ == "__main__":
    root = Path(__file__).resolve().parents[1]
    sys.exit(pytest.main([str(root / "tests" / "test_acceptance.py"), "-q", *sys.argv[1:]]))
