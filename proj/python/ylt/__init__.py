"""Python surface of the single-pass detector toolkit."""

from ._core import (
    AnchorEstimate,
    ConfigError,
    DataError,
    Detection,
    DivergenceError,
    Network,
    NetworkConfig,
    __version__,
    config_to_text,
    estimate_anchors,
    generate_scene,
    iou,
    load_config,
    load_weights,
    parse_config,
    save_weights,
)

__all__ = [
    "AnchorEstimate",
    "ConfigError",
    "DataError",
    "Detection",
    "DivergenceError",
    "Network",
    "NetworkConfig",
    "__version__",
    "config_to_text",
    "estimate_anchors",
    "generate_scene",
    "iou",
    "load_config",
    "load_weights",
    "parse_config",
    "save_weights",
]
