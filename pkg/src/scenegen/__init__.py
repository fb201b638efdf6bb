"""Text-to-traffic-scene generation over OpenDRIVE road graphs."""

__version__ = "0.1.0"
