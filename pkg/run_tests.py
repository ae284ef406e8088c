# run_tests.py - Run the BVFactorize test suite
import sys

import pytest

if __name__ == "__main__":
    sys.exit(pytest.main(["-v", "tests/"]))
