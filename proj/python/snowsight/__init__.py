"""Sidewalk snow coverage from multi-view street reconstructions.

The pipeline learns where sidewalks are from clear-weather reference runs
(COLMAP sparse text models plus semantic label rasters), then classifies query
images by projecting the learned sidewalk into the query view and measuring
how much of it is covered by snow.
"""

import json as _json

from snowsight._snowsight import (
    SnowsightError,
    apply_homography,
    build,
    classify,
    estimate_homography,
    fit_plane,
    haversine_m,
    sweep,
)
from snowsight import _snowsight as _native

__version__ = "1.0.0"


def synth(out_dir, spec=None):
    """Generate a deterministic synthetic scene bundle under out_dir.

    spec is a dict or JSON string that partially overrides the default scene
    (seed, geometry, image sizes, snow scenario); None keeps every default.
    """
    if spec is None:
        text = "{}"
    elif isinstance(spec, str):
        text = spec
    else:
        text = _json.dumps(spec)
    return _native.synth(out_dir, text)


__all__ = [
    "SnowsightError",
    "apply_homography",
    "build",
    "classify",
    "estimate_homography",
    "fit_plane",
    "haversine_m",
    "sweep",
    "synth",
]
