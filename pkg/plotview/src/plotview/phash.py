"""Perceptual average-hash of rendered images.

Golden-image comparisons use this hash rather than file bytes, so
rendering-stack variance (metadata, compression) does not break tests.
"""
from __future__ import annotations

import numpy as np
from PIL import Image

__all__ = ["average_hash", "hamming"]

HASH_SIZE = 16


def average_hash(path, size=HASH_SIZE) -> str:
    """Grayscale-downsample-threshold hash as a hex string."""
    with Image.open(path) as img:
        small = img.convert("L").resize((size, size), Image.LANCZOS)
    arr = np.asarray(small, dtype=float)
    bits = (arr > arr.mean()).ravel()
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return f"{value:0{size * size // 4}x}"


def hamming(h1: str, h2: str) -> int:
    return bin(int(h1, 16) ^ int(h2, 16)).count("1")
