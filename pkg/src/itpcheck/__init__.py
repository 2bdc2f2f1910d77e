"""Ellipticity, Shapiro-Lopatinskii and parameter-ellipticity checks for the
anisotropic interior transmission problem, plus disk eigenvalue scans."""

__version__ = "0.1.0"
