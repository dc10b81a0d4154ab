#!/usr/bin/env python
"""
Test runner for the lab. Sets up the import path, then discovers tests/.

    python run_tests.py             unit tests
    python run_tests.py --slow      also the desk-scale simulations in tests/integration
    python run_tests.py -k kernel   only test modules whose name contains "kernel"
"""
import argparse
import os
import sys
from pathlib import Path

project_root = Path(__file__).parent.absolute()
project_root_str = str(project_root)

os.environ['PYTHONPATH'] = project_root_str + os.pathsep + os.environ.get('PYTHONPATH', '')
if project_root_str not in sys.path:
    sys.path.insert(0, project_root_str)

import unittest


def run(slow: bool = False, keyword: str = '') -> bool:
    if slow:
        os.environ['GSQG_SLOW_TESTS'] = '1'
    pattern = f'test_*{keyword}*.py' if keyword else 'test_*.py'
    suite = unittest.TestLoader().discover(
        start_dir=str(project_root / 'tests'),
        pattern=pattern,
        top_level_dir=project_root_str,
    )
    result = unittest.TextTestRunner(verbosity=2).run(suite)
    return result.wasSuccessful()


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Run the lab test suite")
    parser.add_argument('--slow', action='store_true', help="include simulations gated by GSQG_SLOW_TESTS")
    parser.add_argument('-k', dest='keyword', default='', help="substring of the test module names to run")
    args = parser.parse_args()
    sys.exit(0 if run(args.slow, args.keyword) else 1)
