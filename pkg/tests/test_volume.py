"""Volume loading, phantom generation, trilinear sampling, histograms."""

import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from volpeaks import Volume, VolumeFormatError, VolumeMeta, generate_phantom, load_volume, write_volume
from volpeaks.volume import (
    HISTOGRAM_BINS,
    ValueType,
    histogram,
    parse_meta_text,
    sample_trilinear,
)


def write_raw_volume(tmp_path, dims, spacing, type_name, payload, name="vol"):
    raw = tmp_path / f"{name}.raw"
    raw.write_bytes(payload)
    meta = tmp_path / f"{name}.meta"
    meta.write_text(
        f"dims = {dims[0]} {dims[1]} {dims[2]}\n"
        f"spacing = {spacing[0]} {spacing[1]} {spacing[2]}\n"
        f"type = {type_name}\n"
        f"data = {name}.raw\n"
    )
    return meta


class TestMetaParsing:
    def test_minimal_u8(self, tmp_path):
        meta = write_raw_volume(tmp_path, (2, 2, 2), (1, 1, 1), "u8", bytes(8))
        vol = load_volume(meta)
        assert vol.meta.dims == (2, 2, 2)
        assert vol.data.size == 8

    def test_length_mismatch(self, tmp_path):
        meta = write_raw_volume(tmp_path, (2, 2, 2), (1, 1, 1), "u8", bytes(7))
        with pytest.raises(VolumeFormatError, match="length"):
            load_volume(meta)

    def test_missing_meta_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_volume(tmp_path / "nope.meta")

    def test_missing_raw_file(self, tmp_path):
        meta = tmp_path / "vol.meta"
        meta.write_text("dims = 2 2 2\nspacing = 1 1 1\ntype = u8\ndata = gone.raw\n")
        with pytest.raises(FileNotFoundError):
            load_volume(meta)

    def test_comments_and_blank_lines_ok(self):
        meta, data = parse_meta_text(
            "# test volume\n\ndims = 2 2 2\nspacing = 1 1 1\n\ntype = u8\ndata = x.raw\n"
        )
        assert meta.dims == (2, 2, 2)
        assert data == "x.raw"

    @pytest.mark.parametrize(
        "text",
        [
            "dims = 2 2 2\nspacing = 1 1 1\ntype = u8\n",  # missing data
            "dims = 2 2\nspacing = 1 1 1\ntype = u8\ndata = x\n",  # short dims
            "dims = 2 2 2\nspacing = 1 1 1\ntype = f32\ndata = x\n",  # unknown type
            "dims = 2 2 2\nspacing = 0 1 1\ntype = u8\ndata = x\n",  # zero spacing
            "dims = 2 2 2\nspacing = 1 1 1\ntype = u8\ndata = x\nbogus = 1\n",
            "dims = 2 2 2\ndims = 2 2 2\nspacing = 1 1 1\ntype = u8\ndata = x\n",
        ],
    )
    def test_malformed_meta(self, text):
        with pytest.raises(VolumeFormatError):
            parse_meta_text(text)

    def test_u16_values_against_hand_packed_bytes(self, tmp_path):
        # independent oracle: pack known u16 values, expect value/65535
        values = list(range(0, 64 * 1000, 1000))
        payload = struct.pack("<64H", *values)
        assert len(payload) == 128
        meta = write_raw_volume(tmp_path, (4, 4, 4), (1, 1, 1), "u16le", payload)
        vol = load_volume(meta)
        for flat_index, value in enumerate(values):
            i = flat_index % 4
            j = (flat_index // 4) % 4
            k = flat_index // 16
            assert vol.value_at(i, j, k) == pytest.approx(value / 65535, abs=1e-7)

    def test_raw_bytes_round_trip(self, tmp_path):
        payload = bytes(range(8))
        meta = write_raw_volume(tmp_path, (2, 2, 2), (1, 1, 1), "u8", payload)
        assert load_volume(meta).raw_bytes() == payload

    def test_write_then_load_round_trip(self, tmp_path, phantom32):
        path = write_volume(phantom32, tmp_path / "p.meta")
        again = load_volume(path)
        assert again.meta == phantom32.meta
        assert np.array_equal(again.data, phantom32.data)


class TestVolumeInvariants:
    def test_data_is_read_only(self, phantom32):
        with pytest.raises(ValueError):
            phantom32.data[0] = 1

    def test_dims_must_be_positive(self):
        with pytest.raises(VolumeFormatError):
            VolumeMeta((0, 2, 2), (1, 1, 1), ValueType.U8)

    def test_extent_is_dims_times_spacing(self):
        meta = VolumeMeta((4, 8, 2), (0.5, 1.0, 2.0), ValueType.U8)
        assert meta.extent == (2.0, 8.0, 4.0)
        assert meta.half_extent == (1.0, 4.0, 2.0)


class TestPhantom:
    def test_center_voxel_is_core_value(self, phantom32):
        assert phantom32.value_at(16, 16, 16) == pytest.approx(0.85, abs=1e-5)

    def test_corner_voxel_is_background(self, phantom32):
        assert phantom32.value_at(0, 0, 0) == 0.0

    def test_histogram_has_exactly_four_nonzero_bins(self, phantom32):
        counts = histogram(phantom32)
        assert int((counts > 0).sum()) == 4

    def test_rejects_small_dims(self):
        with pytest.raises(ValueError):
            generate_phantom((8, 32, 32))

    def test_matches_brute_force_construction(self, phantom32):
        # independent scalar implementation of the stated contract: nested
        # axis-aligned shells with boundaries at 45/70/90 % of the half-extent
        n = 32
        expected = np.zeros(HISTOGRAM_BINS, dtype=np.int64)
        values = {0.85: 0, 0.55: 0, 0.25: 0, 0.0: 0}
        for k in range(n):
            for j in range(n):
                for i in range(n):
                    frac = max(
                        abs(i + 0.5 - n / 2) / (n / 2),
                        abs(j + 0.5 - n / 2) / (n / 2),
                        abs(k + 0.5 - n / 2) / (n / 2),
                    )
                    if frac <= 0.45:
                        value = 0.85
                    elif frac <= 0.70:
                        value = 0.55
                    elif frac <= 0.90:
                        value = 0.25
                    else:
                        value = 0.0
                    values[value] += 1
                    stored = round(value * 65535) / 65535
                    expected[min(int(stored * HISTOGRAM_BINS), HISTOGRAM_BINS - 1)] += 1
        assert np.array_equal(histogram(phantom32), expected)
        # sanity on the tally itself: every material present
        assert all(count > 0 for count in values.values())

    def test_spacing_does_not_change_values(self):
        a = generate_phantom((16, 16, 16), (1.0, 1.0, 1.0))
        b = generate_phantom((16, 16, 16), (0.5, 2.0, 3.0))
        assert np.array_equal(a.data, b.data)


def constant_volume(value_u8=128, dims=(8, 8, 8), spacing=(1.0, 1.0, 1.0)):
    meta = VolumeMeta(dims, spacing, ValueType.U8)
    return Volume(meta, np.full(meta.voxel_count, value_u8, dtype=np.uint8))


class TestTrilinear:
    def test_constant_volume_interior(self):
        vol = constant_volume(128)
        for point in [(0.0, 0.0, 0.0), (1.3, -2.1, 0.7), (3.9, 3.9, 3.9)]:
            assert sample_trilinear(vol, point) == pytest.approx(128 / 255, abs=1e-6)

    def test_outside_bounds_is_zero(self):
        vol = constant_volume(255)
        assert sample_trilinear(vol, (4.1, 0, 0)) == 0.0
        assert sample_trilinear(vol, (0, 0, -4.0001)) == 0.0

    def test_midpoint_of_opposed_voxels(self):
        # oracle: direct 8-corner weighted sum degenerates to the average of
        # the two distinct x-neighbors when y/z sit exactly on voxel centers
        meta = VolumeMeta((2, 2, 2), (1.0, 1.0, 1.0), ValueType.U8)
        data = np.zeros(8, dtype=np.uint8)
        data[:] = [0, 255, 0, 255, 0, 255, 0, 255]  # value varies along x only
        vol = Volume(meta, data)
        # x midpoint between centers (-0.5, +0.5); y, z on the center plane
        assert sample_trilinear(vol, (0.0, -0.5, -0.5)) == pytest.approx(0.5, abs=1e-6)

    def test_voxel_centers_return_stored_values(self, phantom32):
        meta = phantom32.meta
        rng = np.random.default_rng(7)
        for _ in range(50):
            i, j, k = rng.integers(0, 32, size=3)
            point = tuple(
                (index + 0.5 - dim / 2) * step
                for index, dim, step in zip((i, j, k), meta.dims, meta.spacing)
            )
            assert sample_trilinear(phantom32, point) == pytest.approx(
                phantom32.value_at(i, j, k), abs=1e-6
            )

    @settings(max_examples=200, deadline=None)
    @given(st.tuples(*[st.floats(-18.0, 18.0) for _ in range(3)]))
    def test_bounded_by_support_voxels(self, point):
        vol = generate_phantom((16, 16, 16), (2.0, 1.0, 1.5))
        value = sample_trilinear(vol, point)
        assert 0.0 <= value <= 1.0
        hx, hy, hz = vol.meta.half_extent
        if abs(point[0]) > hx or abs(point[1]) > hy or abs(point[2]) > hz:
            assert value == 0.0


class TestHistogram:
    def test_all_zero_volume(self):
        counts = histogram(constant_volume(0))
        assert counts[0] == 512
        assert counts.sum() == 512

    def test_value_one_lands_in_last_bin(self):
        counts = histogram(constant_volume(255))
        assert counts[255] == 512

    def test_sums_to_voxel_count(self, phantom32):
        assert histogram(phantom32).sum() == phantom32.meta.voxel_count

    def test_u16_binning_is_exact(self):
        # values straddling a bin boundary: 256/65535 * 256 = 1.00004 → bin 1,
        # while naive float32 math would put it in bin 0 or 1 unpredictably
        meta = VolumeMeta((16, 16, 1), (1, 1, 1), ValueType.U16LE)
        data = np.full(256, 256, dtype="<u2")
        counts = histogram(Volume(meta, data))
        assert counts[1] == 256
