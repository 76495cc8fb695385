"""Rate-distortion guided multiple-trial decoding of Reed-Solomon codes."""

from .channel import ChannelConfig, ReliabilityView
from .gf import Field
from .measures import DistortionMeasure
from .patterns import CoveringCode, PatternSet
from .pipeline import DecodeResult, TrainedProfile
from .rdengine import RdPoint, SourceModel
from .rscodec import HardDecisionWord, RsCode
from .schemes import Scheme, parse_scheme

__version__ = "0.1.0"

__all__ = [
    "ChannelConfig", "CoveringCode", "DecodeResult", "DistortionMeasure", "Field",
    "HardDecisionWord", "PatternSet", "RdPoint", "ReliabilityView", "RsCode", "Scheme",
    "SourceModel", "TrainedProfile", "parse_scheme",
]
