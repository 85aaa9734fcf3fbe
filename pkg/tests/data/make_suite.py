"""Regenerate the natural-image fixture suite from images bundled with scikit-image and scikit-learn."""
import os

import cv2
import numpy as np
from skimage import data as skdata
from sklearn.datasets import load_sample_image

MAX_W, MAX_H = 512, 384
HERE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "suite")

SOURCES = {
    "astronaut": skdata.astronaut,
    "chelsea": skdata.chelsea,
    "coffee": skdata.coffee,
    "ihc": skdata.immunohistochemistry,
    "motorcycle": lambda: skdata.stereo_motorcycle()[0],
    "rocket": skdata.rocket,
    "china": lambda: load_sample_image("china.jpg"),
    "flower": lambda: load_sample_image("flower.jpg"),
}


def center_crop(img):
    h, w = img.shape[:2]
    ch, cw = min(h, MAX_H) & ~1, min(w, MAX_W) & ~1
    top, left = (h - ch) // 2, (w - cw) // 2
    return img[top:top + ch, left:left + cw]


if __name__ == "__main__":
    os.makedirs(HERE, exist_ok=True)
    for name, fetch in SOURCES.items():
        img = center_crop(np.asarray(fetch()))
        cv2.imwrite(os.path.join(HERE, name + ".png"), img[..., ::-1])
        print(name, img.shape)
