"""Non-formal deformation quantization on AdS3 / BTZ backgrounds: group and
geometry primitives, oscillatory star products and desk-scale verification."""

__version__ = "0.1.0"
