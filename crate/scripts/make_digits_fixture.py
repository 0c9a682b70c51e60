#!/usr/bin/env python3
"""Generate data/digits_subset.csv, the synthetic digit-style test fixture.

The repository bundles a small deterministic set of 28x28 rasters shaped
like the digits 0 and 3 so that the image-region masking mechanism and the
784-dimensional bound checks can run without downloading the real dataset
(see scripts/fetch_mnist.sh for that).

Format: 785 comma-separated columns per row, no header. Columns 1..784 are
row-major pixel values in [0, 1] with one decimal place; column 785 is the
integer class label (0 or 3).

Digit-3 rasters put most of their ink in image rows 1-14 / columns 8-21,
so a majority of them exceed the 85-nonzero-pixel eligibility threshold of
the region mechanism, while the rings of the 0 class mostly do not.
"""

import random

SIDE = 28
REGION_ROWS = range(0, 14)
REGION_COLS = range(7, 21)
THRESHOLD = 85


def blank():
    return [[0.0] * SIDE for _ in range(SIDE)]


def paint(img, r, c, value):
    if 0 <= r < SIDE and 0 <= c < SIDE:
        img[r][c] = max(img[r][c], round(value, 1))


def h_bar(img, row, c0, c1, thickness, rng):
    for t in range(thickness):
        for c in range(c0, c1):
            paint(img, row + t, c, rng.uniform(0.4, 1.0))


def v_bar(img, col, r0, r1, thickness, rng):
    for t in range(thickness):
        for r in range(r0, r1):
            paint(img, r, col + t, rng.uniform(0.4, 1.0))


def digit_three(rng):
    img = blank()
    jit = rng.randint(-1, 1)
    thick = rng.choice([3, 4, 4, 4])
    left = 8 + rng.randint(-1, 1)
    right = 20 + rng.randint(-1, 0)
    h_bar(img, 2 + jit, left, right, thick, rng)
    h_bar(img, 10 + jit, left + 1, right, thick, rng)
    h_bar(img, 21 + jit, left, right, thick, rng)
    v_bar(img, right - thick, 2 + jit, 24 + jit, thick, rng)
    return img


def digit_zero(rng):
    img = blank()
    cy, cx = 14 + rng.randint(-1, 1), 14 + rng.randint(-1, 1)
    radius = rng.uniform(7.0, 9.5)
    for r in range(SIDE):
        for c in range(SIDE):
            dist = ((r - cy) ** 2 + (c - cx) ** 2) ** 0.5
            if abs(dist - radius) < 1.3:
                paint(img, r, c, rng.uniform(0.4, 1.0))
    return img


def region_nonzero(img):
    return sum(1 for r in REGION_ROWS for c in REGION_COLS if img[r][c] != 0.0)


def main():
    rng = random.Random(20240901)
    rows = []
    eligible_threes = 0
    for _ in range(60):
        img = digit_zero(rng)
        rows.append((img, 0))
    for _ in range(60):
        img = digit_three(rng)
        if region_nonzero(img) > THRESHOLD:
            eligible_threes += 1
        rows.append((img, 3))
    with open("data/digits_subset.csv", "w") as fh:
        for img, label in rows:
            flat = [str(v) if v else "0" for r in img for v in r]
            fh.write(",".join(flat) + f",{label}\n")
    print(f"wrote {len(rows)} rasters; {eligible_threes}/60 threes eligible "
          f"(region nonzero > {THRESHOLD})")


if __name__ == "__main__":
    main()
