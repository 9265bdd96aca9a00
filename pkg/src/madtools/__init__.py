"""madtools: control-signal rendering, clip preprocessing, and evaluation
tooling for driving world models.

Subpackages stay import-light; heavy optional pieces (the HTTP service,
figure rendering) are only pulled in when used.
"""

from .core import (
    AgentClass,
    AgentSkeleton,
    BBox,
    CameraPose,
    CameraTrajectory,
    EmptyInputError,
    FrameImage,
    Intrinsics,
    Keypoint,
    PoseFrame,
    PoseVideo,
    SchemaError,
    ShapeError,
    SkeletonSchema,
    Track,
    default_schema,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "AgentClass",
    "AgentSkeleton",
    "BBox",
    "CameraPose",
    "CameraTrajectory",
    "EmptyInputError",
    "FrameImage",
    "Intrinsics",
    "Keypoint",
    "PoseFrame",
    "PoseVideo",
    "SchemaError",
    "ShapeError",
    "SkeletonSchema",
    "Track",
    "default_schema",
    "validate",
    "__version__",
]
