#!/usr/bin/env python3
"""
panowarp - command-line entry point when the package is not installed.

Equivalent to the `panowarp` console script:
    python main.py warp --image pano.png --depth pano.pfm --pose 0.1,0,0 --out out/warped
"""
import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), 'src')))

from panowarp.cli import main

if __name__ == "__main__":
    sys.exit(main())
