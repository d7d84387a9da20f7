"""
Coordinate conventions shared by every panowarp module.

Equirectangular pixel (x, y) is sampled at its center (x + 0.5, y + 0.5):

    phi   = 2*pi*(x + 0.5) / W                 longitude, [0, 2*pi)
    theta = pi*(y + 0.5) / H - pi/2            signed latitude, [-pi/2, pi/2]

Row 0 sits at theta = -pi/2. Directions use

    (cos(theta)*cos(phi), sin(theta), -cos(theta)*sin(phi))

so the top row of a panorama looks along -Y and the scene frame is right-handed
with +Y pointing toward the bottom of the image (pass --flip-v for data stored
the other way up).

Every function accepts Python scalars or numpy arrays (broadcasting).
"""
from dataclasses import dataclass
from typing import Tuple, Union
import numpy as np

from .errors import ContractViolationError, DegenerateInputError, InvalidDepthError

Scalar = Union[float, np.ndarray]

TWO_PI = 2.0 * np.pi
HALF_PI = 0.5 * np.pi

# ==================== TYPES ====================

@dataclass(frozen=True)
class SphericalCoord:
    """Latitude `theta` in [-pi/2, pi/2] and longitude `phi` in [0, 2*pi), radians."""
    theta: Scalar
    phi: Scalar


@dataclass(frozen=True)
class Cartesian3:
    """Scene coordinates in meters (unit length when used as a direction)."""
    x: Scalar
    y: Scalar
    z: Scalar

    def norm(self) -> Scalar:
        return np.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def as_array(self) -> np.ndarray:
        """Stack into an (..., 3) float64 array."""
        return np.stack(np.broadcast_arrays(
            np.asarray(self.x, dtype=np.float64),
            np.asarray(self.y, dtype=np.float64),
            np.asarray(self.z, dtype=np.float64)
        ), axis=-1)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Cartesian3":
        arr = np.asarray(arr, dtype=np.float64)
        return cls(arr[..., 0], arr[..., 1], arr[..., 2])

# ==================== PIXEL <-> SPHERE ====================

def pixel_to_spherical(x: Scalar, y: Scalar, w: int, h: int, validate: bool = True) -> SphericalCoord:
    """Longitude/latitude of pixel centers."""
    if validate:
        xa = np.asarray(x)
        ya = np.asarray(y)
        if np.any(xa < 0) or np.any(xa >= w) or np.any(ya < 0) or np.any(ya >= h):
            raise ContractViolationError(f"pixel outside a {w}x{h} panorama")
    phi = TWO_PI * (np.asarray(x, dtype=np.float64) + 0.5) / w
    theta = np.pi * (np.asarray(y, dtype=np.float64) + 0.5) / h - HALF_PI
    return SphericalCoord(theta=_unwrap(theta), phi=_unwrap(phi))


def spherical_to_pixel(s: SphericalCoord, w: int, h: int, validate: bool = True) -> Tuple[Scalar, Scalar]:
    """Continuous pixel coordinates (no rounding); pixel centers map to integers."""
    if validate:
        _check_spherical(s)
    x = np.asarray(s.phi, dtype=np.float64) * w / TWO_PI - 0.5
    y = (np.asarray(s.theta, dtype=np.float64) + HALF_PI) * h / np.pi - 0.5
    return _unwrap(x), _unwrap(y)

# ==================== SPHERE <-> CARTESIAN ====================

def spherical_to_cartesian(s: SphericalCoord) -> Cartesian3:
    """Unit direction for a latitude/longitude pair."""
    theta = np.asarray(s.theta, dtype=np.float64)
    phi = np.asarray(s.phi, dtype=np.float64)
    cos_t = np.cos(theta)
    return Cartesian3(
        x=_unwrap(cos_t * np.cos(phi)),
        y=_unwrap(np.sin(theta)),
        z=_unwrap(-cos_t * np.sin(phi))
    )


def cartesian_to_spherical(v: Cartesian3) -> SphericalCoord:
    """Full-quadrant inverse of spherical_to_cartesian; input need not be unit length."""
    x = np.asarray(v.x, dtype=np.float64)
    y = np.asarray(v.y, dtype=np.float64)
    z = np.asarray(v.z, dtype=np.float64)
    if np.any((x == 0) & (y == 0) & (z == 0)):
        raise DegenerateInputError("cannot take the direction of a zero vector")
    theta = np.arctan2(y, np.sqrt(x * x + z * z))
    phi = wrap_longitude(np.arctan2(-z, x))
    return SphericalCoord(theta=_unwrap(theta), phi=_unwrap(phi))


def wrap_longitude(phi: Scalar) -> Scalar:
    """Map any longitude into [0, 2*pi)."""
    phi = np.asarray(phi, dtype=np.float64)
    phi = np.where(phi < 0.0, phi + TWO_PI, phi)
    # -tiny + 2*pi rounds to exactly 2*pi
    return np.where(phi >= TWO_PI, phi - TWO_PI, phi)


def lift_to_3d(s: SphericalCoord, d: Scalar) -> Cartesian3:
    """Point at distance `d` along the direction of `s`."""
    d = np.asarray(d, dtype=np.float64)
    if np.any(d <= 0):
        raise InvalidDepthError("depth must be strictly positive to lift a pixel")
    u = spherical_to_cartesian(s)
    return Cartesian3(x=_unwrap(d * u.x), y=_unwrap(d * u.y), z=_unwrap(d * u.z))

# ==================== GRIDS ====================

def pixel_directions(w: int, h: int) -> np.ndarray:
    """(H, W, 3) unit directions of every pixel center."""
    ys, xs = np.mgrid[0:h, 0:w]
    s = pixel_to_spherical(xs, ys, w, h, validate=False)
    return spherical_to_cartesian(s).as_array()


def directions_to_pixels(dirs: np.ndarray, w: int, h: int) -> Tuple[np.ndarray, np.ndarray]:
    """Continuous panorama coordinates for an (..., 3) array of nonzero directions."""
    s = cartesian_to_spherical(Cartesian3.from_array(dirs))
    return spherical_to_pixel(s, w, h, validate=False)

# ==================== HELPERS ====================

def _check_spherical(s: SphericalCoord) -> None:
    theta = np.asarray(s.theta)
    phi = np.asarray(s.phi)
    if np.any(theta < -HALF_PI) or np.any(theta > HALF_PI):
        raise ContractViolationError("latitude outside [-pi/2, pi/2]")
    if np.any(phi < 0) or np.any(phi >= TWO_PI):
        raise ContractViolationError("longitude outside [0, 2*pi)")


def _unwrap(a: np.ndarray) -> Scalar:
    """Return Python floats for 0-d results so scalar callers get scalars back."""
    a = np.asarray(a)
    return float(a) if a.ndim == 0 else a
