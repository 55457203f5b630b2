"""Multilevel polar-coded modulation with Honda-Yamamoto shaping."""

__version__ = "0.1.0"
