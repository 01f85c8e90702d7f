"""Smoke test for the Python extension.

Build and stage the module first:

    cargo build --release -p hft-saliency-py
    cp target/release/libhft_saliency.so python/hft_saliency.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import hft_saliency as hs


def argmax(rows):
    best = max((v, r, c) for r, row in enumerate(rows) for c, v in enumerate(row))
    return best[1], best[2]


def main():
    q = hs.Quaternion(0, 1, 0, 0) * hs.Quaternion(0, 0, 1, 0)
    assert (q.a, q.b, q.c, q.d) == (0, 0, 0, 1), q
    assert abs(hs.Quaternion(1, 2, 2, 4).norm() - 5.0) < 1e-12

    planes = [[[math.sin(r * 3 + c + k) for c in range(6)] for r in range(5)] for k in range(4)]
    back = hs.hft_inverse(hs.hft_forward(planes))
    err = max(abs(x - y) for p, q in zip(planes, back) for rp, rq in zip(p, q) for x, y in zip(rp, rq))
    assert err < 1e-9, err

    image, mask = hs.make_pattern("odd-color-bar")
    assert len(image) == 120 and len(image[0]) == 120 and len(image[0][0]) == 3
    res = hs.hft(image)
    assert len(res["maps"]) == 8 and 1 <= res["k"] <= 8
    assert len(res["trace"]) == 8

    for model in hs.MODELS:
        sal = hs.saliency(image, model=model, mask=mask)
        assert all(v >= 0 and math.isfinite(v) for row in sal for v in row), model

    sal = hs.saliency(image)
    r, c = argmax(sal)
    # the map is 128x128, the mask 120x120
    assert mask[r * 120 // 128][c * 120 // 128], (r, c)

    flat = [[1.0] * 4 for _ in range(4)]
    box = [[r < 2 for c in range(4)] for r in range(4)]
    assert hs.roc_auc(flat, box) == 0.5
    assert hs.podsc([[float(v) for v in row] for row in box], box) == 1.0

    try:
        hs.saliency(image, model="itti")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown model accepted")
    print("python smoke test passed")


if __name__ == "__main__":
    main()
