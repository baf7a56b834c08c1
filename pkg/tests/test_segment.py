import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from inkscan.errors import PaletteTooSmall
from inkscan.kmeans import ClusterModel
from inkscan.preprocess import BinaryMask, LineRegion
from inkscan.segment import (
    DEFAULT_PALETTE,
    WHITE,
    background_cluster,
    colorize,
    encode_png,
    gray_png,
    line_cluster_table,
    mask_png,
    write_png,
)


def model_of(labels, k):
    labels = np.asarray(labels, dtype=np.int64)
    return ClusterModel(k=k, centroids=np.zeros((k, 1)), labels=labels,
                        iterations_run=1, sse=0.0, converged=True)


def decode(png):
    return np.asarray(Image.open(io.BytesIO(png)))


class TestColorize:
    def test_checkerboard(self):
        labels = np.add.outer(np.arange(4), np.arange(4)) % 2
        img = colorize(model_of(labels, 2))
        for r in range(4):
            for c in range(4):
                assert tuple(img.rgb[r, c]) == DEFAULT_PALETTE[labels[r, c]]

    def test_uniform(self):
        img = colorize(model_of(np.zeros((3, 5), int), 1))
        assert (img.rows, img.cols) == (3, 5)
        assert all(tuple(p) == DEFAULT_PALETTE[0] for p in img.rgb.reshape(-1, 3))

    def test_default_palette_distinct(self):
        top7 = DEFAULT_PALETTE[:7]
        assert len(set(top7)) == 7
        assert (0, 0, 0) not in DEFAULT_PALETTE and (255, 255, 255) not in DEFAULT_PALETTE

    def test_palette_too_small(self):
        with pytest.raises(PaletteTooSmall):
            colorize(model_of(np.zeros((2, 2), int), 3), palette=[(1, 2, 3), (4, 5, 6)])

    def test_duplicate_palette_rejected(self):
        with pytest.raises(ValueError):
            colorize(model_of(np.zeros((2, 2), int), 2), palette=[(1, 2, 3), (1, 2, 3)])

    def test_background_and_merge(self):
        labels = np.array([[0, 1, 2]])
        img = colorize(model_of(labels, 3), background=1, merge_into_background=[2])
        assert tuple(img.rgb[0, 0]) == DEFAULT_PALETTE[0]
        assert tuple(img.rgb[0, 1]) == WHITE == tuple(img.rgb[0, 2])

    def test_background_cluster(self):
        labels = np.array([[0, 1, 1], [2, 1, 0]])
        ink = np.array([[True, False, False], [True, True, False]])
        assert background_cluster(model_of(labels, 3), BinaryMask(ink)) == 1
        assert background_cluster(model_of(labels, 3), BinaryMask(np.ones((2, 3), bool))) is None


class TestLineTable:
    def test_two_thirds(self):
        labels = np.array([[0, 0, 1]])
        table = line_cluster_table(model_of(labels, 2), [LineRegion(1, 0, 1)], BinaryMask(np.ones((1, 3), bool)))
        e = table.entries[0]
        assert (e.cluster, e.ink_pixels) == (0, 3)
        assert e.purity == pytest.approx(2 / 3)

    def test_background_excluded(self):
        labels = np.array([[3, 3, 3, 1, 1]])
        ink = np.array([[False, False, False, True, True]])
        table = line_cluster_table(model_of(labels, 4), [LineRegion(1, 0, 1)], BinaryMask(ink))
        assert table.entries[0].cluster == 1 and table.entries[0].purity == 1.0

    def test_groups_and_text(self):
        labels = np.repeat(np.array([2, 2, 0, 5])[:, None], 3, axis=1)
        regions = [LineRegion(i + 1, i, i + 1) for i in range(4)]
        table = line_cluster_table(model_of(labels, 6), regions, BinaryMask(np.ones((4, 3), bool)))
        assert table.groups() == [(2, [1, 2]), (0, [3]), (5, [4])]
        text = table.to_text()
        assert "C-1" in text and "1,2" in text
        csv = table.to_csv().strip().split("\n")
        assert csv[0] == "line_id,cluster,purity,ink_pixels" and len(csv) == 5

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31), st.permutations(list(range(4))))
    def test_permutation_invariant(self, seed, perm):
        rng = np.random.default_rng(seed)
        labels = rng.integers(0, 4, size=(6, 5))
        # make the dominant label unique in every line
        labels[:, :3] = labels[:, :1]
        ink = BinaryMask(np.ones((6, 5), bool))
        regions = [LineRegion(i + 1, i, i + 1) for i in range(6)]
        a = line_cluster_table(model_of(labels, 4), regions, ink)
        b = line_cluster_table(model_of(np.asarray(perm)[labels], 4), regions, ink)
        for x, y in zip(a.entries, b.entries):
            assert y.cluster == perm[x.cluster]
            assert y.purity == x.purity


class TestPng:
    def test_single_red_pixel(self):
        png = encode_png(np.array([[[255, 0, 0]]], dtype=np.uint8))
        img = Image.open(io.BytesIO(png))
        assert img.mode == "RGB" and img.size == (1, 1)
        assert img.getpixel((0, 0)) == (255, 0, 0)

    def test_two_by_two(self):
        rgb = np.array([[[1, 2, 3], [4, 5, 6]], [[7, 8, 9], [10, 11, 12]]], dtype=np.uint8)
        assert decode(encode_png(rgb)).tolist() == rgb.tolist()

    def test_checkerboard_segmentation(self):
        labels = np.add.outer(np.arange(8), np.arange(8)) % 2
        img = colorize(model_of(labels, 2))
        back = decode(write_png(img))
        assert back.shape == (8, 8, 3)
        assert back.tolist() == img.rgb.tolist()

    def test_non_square(self):
        rgb = np.random.default_rng(0).integers(0, 256, size=(5, 11, 3)).astype(np.uint8)
        assert decode(encode_png(rgb)).tolist() == rgb.tolist()

    def test_mask_png(self):
        ink = np.array([[True, False], [False, False]])
        back = decode(mask_png(BinaryMask(ink)))
        assert back.tolist() == [[0, 255], [255, 255]]

    def test_gray_stretch(self):
        back = decode(gray_png(np.array([[0.0, 0.25], [1.0, 0.0]])))
        assert back.tolist() == [[0, 64], [255, 0]]
        assert decode(gray_png(np.full((2, 2), 0.3))).tolist() == [[0, 0], [0, 0]]

    def test_rejects_float(self):
        with pytest.raises(ValueError):
            encode_png(np.zeros((2, 2)))
