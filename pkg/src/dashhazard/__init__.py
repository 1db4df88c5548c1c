"""Dashcam hazard analysis: reaction detection, hazard voting, captioning, scoring."""

__version__ = "0.1.0"
