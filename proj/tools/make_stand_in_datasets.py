#!/usr/bin/env python3
"""Builds the bundled IDX image corpora under data/.

Real MNIST/FashionMNIST IDX files drop straight into the runner; this script
exists for environments without them. It derives two 28x28 grayscale corpora
from datasets that ship inside scikit-learn and scikit-image:

  digits.*   - the bundled 8x8 handwritten digits (1797 real samples),
               upscaled to 28x28 with deterministic shift/rotation/scale
               augmentation
  patches.*  - 28x28 crops of the bundled sample photographs and textures

Both are written as IDX3-ubyte, gzip-compressed, with separate train/test
files. Everything is seeded, so reruns reproduce the same bytes.
"""

import argparse
import gzip
import pathlib
import struct

import numpy as np
from scipy import ndimage


def write_idx(path: pathlib.Path, images: np.ndarray) -> None:
    assert images.dtype == np.uint8 and images.ndim == 3
    count, rows, cols = images.shape
    payload = struct.pack(">IIII", 0x00000803, count, rows, cols) + images.tobytes()
    with open(path, "wb") as raw:
        with gzip.GzipFile(fileobj=raw, mode="wb", compresslevel=9, mtime=0) as fh:
            fh.write(payload)
    print(f"wrote {path} ({count} images)")


def augmented_digits(total: int, rng: np.random.Generator) -> np.ndarray:
    from sklearn.datasets import load_digits

    base = load_digits().images / 16.0  # 1797 x 8 x 8 in [0, 1]
    out = np.zeros((total, 28, 28), dtype=np.uint8)
    for i in range(total):
        img = base[rng.integers(len(base))]
        big = ndimage.zoom(img, 28 / 8, order=3)
        angle = rng.uniform(-12.0, 12.0)
        big = ndimage.rotate(big, angle, reshape=False, order=1, mode="constant")
        shift = rng.integers(-2, 3, size=2)
        big = ndimage.shift(big, shift, order=0, mode="constant")
        out[i] = (np.clip(big, 0.0, 1.0) * 255).round().astype(np.uint8)
    return out


def photo_patches(total: int, rng: np.random.Generator) -> np.ndarray:
    from skimage import data as skdata

    sources = []
    for name in ("camera", "coins", "text", "brick", "grass", "gravel"):
        img = getattr(skdata, name)()
        if img.ndim == 3:
            img = img.mean(axis=2)
        sources.append(img.astype(np.float64) / 255.0)
    astronaut = skdata.astronaut().mean(axis=2) / 255.0
    sources.append(astronaut)

    out = np.zeros((total, 28, 28), dtype=np.uint8)
    for i in range(total):
        src = sources[rng.integers(len(sources))]
        scale = rng.uniform(1.0, 3.0)  # patch side in source pixels: 28 * scale
        side = int(28 * scale)
        r = rng.integers(0, src.shape[0] - side)
        c = rng.integers(0, src.shape[1] - side)
        patch = src[r : r + side, c : c + side]
        patch = ndimage.zoom(patch, 28 / side, order=1)[:28, :28]
        if rng.integers(2):
            patch = patch[:, ::-1]
        out[i] = (np.clip(patch, 0.0, 1.0) * 255).round().astype(np.uint8)
    return out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data", type=pathlib.Path)
    parser.add_argument("--train", default=5000, type=int)
    parser.add_argument("--test", default=500, type=int)
    parser.add_argument("--seed", default=20240917, type=int)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(args.seed)
    digits = augmented_digits(args.train + args.test, rng)
    write_idx(args.out / "digits.train-images-idx3-ubyte.gz", digits[: args.train])
    write_idx(args.out / "digits.test-images-idx3-ubyte.gz", digits[args.train :])

    rng = np.random.default_rng(args.seed + 1)
    patches = photo_patches(args.train + args.test, rng)
    write_idx(args.out / "patches.train-images-idx3-ubyte.gz", patches[: args.train])
    write_idx(args.out / "patches.test-images-idx3-ubyte.gz", patches[args.train :])


if __name__ == "__main__":
    main()
