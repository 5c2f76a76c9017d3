"""Post-processing core for ambiguity-aware scene-text spotting."""

__version__ = "0.1.0"
