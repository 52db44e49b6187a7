"""Exact enumeration and singularity analysis for walks on the slit plane."""

__version__ = "0.1.0"
