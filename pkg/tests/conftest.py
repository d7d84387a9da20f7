"""Pytest configuration and shared fixtures."""

import sys
import pytest
import numpy as np

from panowarp import instances
from panowarp.cache import GridCache
from panowarp.config import Settings
from panowarp.pnvi import PnviState
from panowarp.models import CameraPose
from panowarp.raster_io import write_pfm, write_rgb

from oracles import RoomOracleBackend, render_room


@pytest.fixture(autouse=True)
def panowarp_settings():
    """Quiet, two-thread settings and a fresh grid cache for every test."""
    previous_settings, previous_cache = instances.settings, instances.grid_cache
    instances.settings = Settings(threads=2, quiet=True)
    instances.grid_cache = GridCache()
    yield instances.settings
    instances.settings, instances.grid_cache = previous_settings, previous_cache


@pytest.fixture
def room():
    """64x32 sphere-room panorama and depth seen from the center."""
    return render_room((0.0, 0.0, 0.0), 64, 32)


@pytest.fixture
def room_state(room):
    image, depth = room
    return PnviState(CameraPose(), image, depth)


@pytest.fixture
def oracle_backend():
    return RoomOracleBackend()


@pytest.fixture
def pano_files(tmp_path, room):
    """The room written to disk as image.png + depth.pfm."""
    image, depth = room
    image_path = tmp_path / "inputs" / "image.png"
    depth_path = tmp_path / "inputs" / "depth.pfm"
    write_rgb(image_path, image.data)
    write_pfm(depth_path, depth.data)
    return image_path, depth_path


@pytest.fixture
def random_rgb():
    rng = np.random.default_rng(7)
    return rng.integers(0, 256, size=(16, 32, 3), dtype=np.uint8)


@pytest.fixture
def stub_inpainter(tmp_path):
    """Write a stand-in external inpainting command; returns a factory for its command line."""

    def make(behavior: str = "fill") -> str:
        script = tmp_path / f"stub_{behavior}.py"
        script.write_text(STUB_SOURCE)
        return f"{sys.executable} {script} {behavior}"

    return make


STUB_SOURCE = '''
import argparse
import sys
import time
import cv2

parser = argparse.ArgumentParser()
parser.add_argument("behavior")
parser.add_argument("--image")
parser.add_argument("--mask")
parser.add_argument("--out")
args = parser.parse_args()

if args.behavior == "fail":
    sys.stderr.write("model weights not found\\n")
    sys.exit(3)
if args.behavior == "sleep":
    time.sleep(30)
if args.behavior == "nooutput":
    sys.exit(0)

img = cv2.imread(args.image, cv2.IMREAD_COLOR)
mask = cv2.imread(args.mask, cv2.IMREAD_GRAYSCALE)
if args.behavior == "wrongsize":
    img = cv2.resize(img, (img.shape[1] + 2, img.shape[0]))
else:
    img[mask > 127] = (30, 20, 10)
cv2.imwrite(args.out, img)
'''
