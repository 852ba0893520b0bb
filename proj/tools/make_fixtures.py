#!/usr/bin/env python3
# Copyright 2026 The copyaudit Authors
# SPDX-License-Identifier: Apache-2.0
"""Regenerates the synthetic PNG fixtures under tests/fixtures/.

Each fixture is a 256x256 RGB scene with one dominant foreground object on
a textured background, so that mask extraction has a clear shape to find.
"""

import pathlib

import numpy as np
from PIL import Image, ImageDraw, ImageFilter

SIZE = 256
OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def background(rng, top, bottom):
    t = np.linspace(0.0, 1.0, SIZE)[:, None, None]
    grad = (1 - t) * np.array(top) + t * np.array(bottom)
    grad = np.broadcast_to(grad, (SIZE, SIZE, 3)).copy()
    grad += rng.normal(0.0, 6.0, grad.shape)
    return Image.fromarray(np.clip(grad, 0, 255).astype(np.uint8))


def portrait(rng):
    img = background(rng, (40, 50, 70), (20, 25, 35))
    d = ImageDraw.Draw(img)
    d.ellipse((48, 170, 208, 300), fill=(70, 90, 150))
    d.rectangle((110, 140, 146, 185), fill=(215, 170, 140))
    d.ellipse((78, 40, 178, 165), fill=(230, 185, 155))
    d.ellipse((72, 30, 184, 90), fill=(90, 60, 40))
    d.ellipse((103, 90, 115, 100), fill=(40, 40, 40))
    d.ellipse((141, 90, 153, 100), fill=(40, 40, 40))
    d.arc((110, 115, 146, 140), 20, 160, fill=(150, 60, 60), width=3)
    return img


def dog(rng):
    img = background(rng, (60, 90, 55), (35, 60, 30))
    d = ImageDraw.Draw(img)
    d.ellipse((60, 110, 190, 180), fill=(235, 205, 150))
    d.ellipse((160, 70, 225, 130), fill=(240, 210, 160))
    d.polygon([(165, 80), (150, 120), (172, 110)], fill=(200, 160, 110))
    for x in (75, 100, 150, 170):
        d.rectangle((x, 165, x + 14, 225), fill=(225, 195, 140))
    d.line((62, 130, 25, 100), fill=(235, 205, 150), width=10)
    d.ellipse((210, 95, 222, 105), fill=(30, 20, 20))
    return img


def house(rng):
    img = background(rng, (150, 190, 235), (200, 220, 240))
    d = ImageDraw.Draw(img)
    d.rectangle((0, 200, 256, 256), fill=(90, 140, 70))
    d.rectangle((60, 110, 196, 210), fill=(200, 200, 190))
    d.polygon([(45, 115), (128, 45), (211, 115)], fill=(140, 40, 40))
    d.rectangle((112, 150, 144, 210), fill=(90, 60, 40))
    d.rectangle((75, 130, 100, 155), fill=(120, 170, 210))
    d.rectangle((156, 130, 181, 155), fill=(120, 170, 210))
    return img


def tree(rng):
    img = background(rng, (235, 225, 200), (210, 200, 170))
    d = ImageDraw.Draw(img)
    d.rectangle((115, 150, 141, 240), fill=(100, 70, 40))
    d.ellipse((55, 40, 200, 175), fill=(40, 110, 45))
    d.ellipse((80, 20, 175, 110), fill=(50, 125, 50))
    return img


def car(rng):
    img = background(rng, (60, 60, 65), (110, 110, 115))
    d = ImageDraw.Draw(img)
    d.rounded_rectangle((30, 130, 226, 190), radius=18, fill=(245, 210, 40))
    d.polygon([(70, 130), (100, 90), (170, 90), (195, 130)], fill=(235, 200, 35))
    d.polygon([(85, 128), (106, 98), (132, 98), (132, 128)], fill=(170, 200, 220))
    d.polygon([(140, 128), (140, 98), (165, 98), (185, 128)], fill=(170, 200, 220))
    for cx in (75, 185):
        d.ellipse((cx - 22, 170, cx + 22, 214), fill=(20, 20, 20))
        d.ellipse((cx - 9, 183, cx + 9, 201), fill=(160, 160, 160))
    return img


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    scenes = {"portrait": portrait, "dog": dog, "house": house, "tree": tree, "car": car}
    for i, (name, fn) in enumerate(scenes.items()):
        rng = np.random.default_rng(1000 + i)
        img = np.asarray(fn(rng).filter(ImageFilter.GaussianBlur(0.6)), dtype=np.float64)
        img += rng.normal(0.0, 12.0, img.shape)  # sensor grain
        img = Image.fromarray(np.clip(img, 0, 255).round().astype(np.uint8))
        img.save(OUT / f"{name}.png", optimize=False)


if __name__ == "__main__":
    main()
