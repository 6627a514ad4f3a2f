#!/usr/bin/env python3
"""Regenerates the digits784 IDX fixtures in this directory.

Upsamples the 8x8 UCI handwritten digits bundled with scikit-learn to
28x28 (bilinear), rescales intensities to 0..255, and pads the sample
count to 2200 with 1-pixel translated copies so tests can subsample
N=2000. Output follows the IDX conventions: big-endian u32 headers,
magic 0x00000803 for images and 0x00000801 for labels, u8 payload.
"""
import struct
import numpy as np
from scipy.ndimage import zoom
from sklearn.datasets import load_digits

TARGET_N = 2200
RNG = np.random.RandomState(424242)


def upsample(img8):
    out = zoom(img8.reshape(8, 8), 28.0 / 8.0, order=1)
    out = np.clip(out * (255.0 / 16.0), 0.0, 255.0)
    return out.astype(np.uint8)


def main():
    d = load_digits()
    images = [upsample(x) for x in d.data]
    labels = list(d.target)

    n_orig = len(images)
    while len(images) < TARGET_N:
        i = RNG.randint(0, n_orig)
        dy, dx = RNG.randint(-1, 2), RNG.randint(-1, 2)
        shifted = np.roll(np.roll(images[i], dy, axis=0), dx, axis=1)
        if dy > 0:
            shifted[:dy, :] = 0
        elif dy < 0:
            shifted[dy:, :] = 0
        if dx > 0:
            shifted[:, :dx] = 0
        elif dx < 0:
            shifted[:, dx:] = 0
        images.append(shifted)
        labels.append(labels[i])

    imgs = np.stack(images)
    labs = np.asarray(labels, dtype=np.uint8)

    with open("digits784-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(imgs), 28, 28))
        f.write(imgs.tobytes())
    with open("digits784-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labs)))
        f.write(labs.tobytes())
    print("wrote", imgs.shape, labs.shape)


if __name__ == "__main__":
    main()
