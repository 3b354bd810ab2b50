"""
pytest configuration: the ``slow`` marker and the lib import path.

Slow tests are the long acceptance runs; they are skipped unless MQ_RUN_SLOW=1.
"""
import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), 'lib'))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long acceptance run, enabled with MQ_RUN_SLOW=1")


def pytest_collection_modifyitems(config, items):
    if os.getenv('MQ_RUN_SLOW') == '1':
        return
    skip_slow = pytest.mark.skip(reason="set MQ_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
