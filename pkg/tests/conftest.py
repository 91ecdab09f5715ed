# Copyright 2025 Frank Sommers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Shared pytest fixtures and configuration for all tests.
"""
import os
import sys
import json
import tempfile
from pathlib import Path
import pytest

# Add parent directory to path to import the modules
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

FIXTURES_DIR = Path(__file__).parent / "fixtures"


# ==================== Parameter Fixtures ====================

@pytest.fixture
def kdv_params():
    """Pure KdV symbol: alpha = gamma = 0, beta = 1."""
    from dispersion import DispersionParams
    return DispersionParams(alpha=0.0, beta=1.0, gamma=0.0)


@pytest.fixture
def benjamin_params():
    """Benjamin symbol with both dispersive terms: alpha = beta = 1."""
    from dispersion import DispersionParams
    return DispersionParams(alpha=1.0, beta=1.0, gamma=0.0)


@pytest.fixture
def safe_block_params():
    """beta = 1/3, alpha = 0: the numeric block bounds stay inside their envelope."""
    from dispersion import DispersionParams
    return DispersionParams(alpha=0.0, beta=1.0 / 3.0, gamma=0.0)


@pytest.fixture
def small_grid():
    """64 points on [-pi, pi)."""
    from grid_fourier import SpatialGrid
    return SpatialGrid(64, 2 * 3.141592653589793)


# ==================== Sample Data Fixtures ====================

@pytest.fixture
def golden():
    """Golden constants shared by several test modules."""
    return json.loads((FIXTURES_DIR / "golden.json").read_text())


@pytest.fixture
def run_config_file():
    """key=value config file for the CLI."""
    return FIXTURES_DIR / "run_config.env"


# ==================== File System Fixtures ====================

@pytest.fixture
def temp_output_dir():
    """Create a temporary output directory for testing."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def sample_csv(temp_output_dir):
    """Small sweep CSV with a clean power law."""
    path = temp_output_dir / "sweep.csv"
    path.write_text("N,ratio\n16,0.25\n64,0.5\n256,1.0\n1024,2.0\n")
    return path


# ==================== Configuration Fixtures ====================

@pytest.fixture
def mock_config():
    """Environment values pinned for every test."""
    return {
        "BLAB_THREADS": "2",
        "LOG_LEVEL": "WARNING",
        "BLAB_OUTPUT_DIR": "output",
    }


@pytest.fixture(autouse=True)
def mock_environment(mock_config, monkeypatch):
    """Automatically pin environment variables for all tests."""
    for key, value in mock_config.items():
        monkeypatch.setenv(key, value)


# ==================== CLI Testing Fixtures ====================

@pytest.fixture
def cli_runner():
    """Create a Click CLI test runner."""
    from click.testing import CliRunner
    return CliRunner()


# ==================== Utility Fixtures ====================

@pytest.fixture
def assert_json_equal():
    """Helper fixture for comparing JSON data."""
    def _assert_json_equal(actual, expected, ignore_keys=None):
        """Assert two JSON objects are equal, optionally ignoring certain keys."""
        ignore_keys = ignore_keys or []

        if isinstance(actual, dict) and isinstance(expected, dict):
            actual_filtered = {k: v for k, v in actual.items() if k not in ignore_keys}
            expected_filtered = {k: v for k, v in expected.items() if k not in ignore_keys}
            assert actual_filtered.keys() == expected_filtered.keys()
            for key in actual_filtered:
                _assert_json_equal(actual_filtered[key], expected_filtered[key], ignore_keys)
        elif isinstance(actual, list) and isinstance(expected, list):
            assert len(actual) == len(expected)
            for a, e in zip(actual, expected):
                _assert_json_equal(a, e, ignore_keys)
        else:
            assert actual == expected

    return _assert_json_equal


# ==================== Marker Configuration ====================

def pytest_configure(config):
    """Register custom markers."""
    for name, text in (
        ("unit", "mark test as a unit test"),
        ("integration", "mark test as an integration test"),
        ("slow", "mark test as slow running"),
        ("dispersion", "mark test as testing the dispersion symbol"),
        ("fourier", "mark test as testing grid transforms"),
        ("bourgain", "mark test as testing Sobolev and Bourgain norms"),
        ("dyadic", "mark test as testing dyadic blocks"),
        ("bilinear", "mark test as testing the bilinear probes"),
        ("illposed", "mark test as testing the Picard-iterate probe"),
        ("solver", "mark test as testing the time stepper"),
        ("reporting", "mark test as testing output records"),
        ("cli", "mark test as testing the command line"),
    ):
        config.addinivalue_line("markers", f"{name}: {text}")
