"""sketchtts: sketch-conditioned expressive speech synthesis.

Draw a coarse pitch or energy trend, and the system recovers detailed
prosody contours and renders speech that follows them.
"""

__version__ = "0.1.0"

from .config import DiffusionConfig, FrameConfig, ModelConfig, TrainConfig
from .errors import SketchTTSError

__all__ = ["DiffusionConfig", "FrameConfig", "ModelConfig", "TrainConfig",
           "SketchTTSError", "__version__"]
