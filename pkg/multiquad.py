#!/usr/bin/env python3
"""
Launcher for the multiquadratic field shapes toolkit
"""
import logging
import os
import sys
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Add the current directory to the Python path
current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, current_dir)

logging.basicConfig(
    level=os.getenv('MQ_LOG_LEVEL', 'INFO').upper(),
    format='%(asctime)s %(levelname)s %(name)s: %(message)s',
)


def banner():
    print("🔢 Multiquadratic field shapes")
    print("=" * 50)
    print(f"📐 Dimension cap: n <= {os.getenv('MQ_MAX_N', '6')}")
    print(f"🧮 Enumeration budget: {os.getenv('MQ_NODE_BUDGET', '1000000000')} nodes")
    print(f"🎯 Precision: {os.getenv('MQ_PRECISION_BITS', '128')} bits")
    print("=" * 50)


if __name__ == "__main__":
    from api.commands import main
    if os.getenv('MQ_QUIET') != '1':
        banner()
    sys.exit(main())
