"""Peak evaluation, multi-peak blending, LUT generation, editing, JSON."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from volpeaks import LookupTable, Peak, TransferFunction, TransferFunctionError, TransferFunctionFormatError
from volpeaks.transfer import LUT_SIZE, MAX_PEAKS, PALETTE, peak_value, tf_evaluate

peaks_st = st.builds(
    Peak,
    center=st.floats(0.0, 1.0),
    width=st.floats(1e-3, 0.5),
    height=st.floats(0.0, 1.0),
    color=st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1)),
)

tf_st = st.builds(
    TransferFunction,
    peaks=st.lists(
        st.builds(
            Peak,
            center=st.floats(0.0, 1.0),
            width=st.floats(0.01, 0.5),
            height=st.floats(0.0, 1.0),
            color=st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1)),
            enabled=st.booleans(),
        ),
        max_size=MAX_PEAKS,
    ),
)


class TestPeakValue:
    def test_center_reaches_height(self):
        assert peak_value(Peak(0.5, 0.2, 1.0), 0.5) == pytest.approx(1.0, abs=1e-12)

    def test_outside_support_is_zero(self):
        peak = Peak(0.5, 0.2, 1.0)
        assert peak_value(peak, 0.71) == 0.0
        assert peak_value(peak, 0.29) == 0.0

    def test_quarter_pi_spot_value(self):
        # Eq. argument at x = 0.4 is pi/4 for (c, w) = (0.5, 0.2)
        assert peak_value(Peak(0.5, 0.2, 1.0), 0.4) == pytest.approx(
            0.70710678, abs=1e-8
        )

    def test_half_width_spot_values(self):
        peak = Peak(0.3, 0.12, 0.65)
        expected = 0.65 * math.sin(math.pi / 4)
        assert peak_value(peak, 0.3 - 0.06) == pytest.approx(expected, abs=1e-9)
        assert peak_value(peak, 0.3 + 0.06) == pytest.approx(expected, abs=1e-9)

    @settings(max_examples=300, deadline=None)
    @given(peaks_st, st.floats(-1.0, 1.0))
    def test_symmetry(self, peak, offset_frac):
        d = offset_frac * peak.width
        assert peak_value(peak, peak.center + d) == pytest.approx(
            peak_value(peak, peak.center - d), abs=1e-9
        )

    @settings(max_examples=300, deadline=None)
    @given(peaks_st)
    def test_boundary_zeros(self, peak):
        assert abs(peak_value(peak, peak.center - peak.width)) <= 1e-9
        assert abs(peak_value(peak, peak.center + peak.width)) <= 1e-9

    @settings(max_examples=100, deadline=None)
    @given(peaks_st)
    def test_max_is_height_at_center(self, peak):
        xs = np.linspace(peak.center - peak.width, peak.center + peak.width, 501)
        values = [peak_value(peak, x) for x in xs]
        assert max(values) <= peak.height + 1e-12
        assert peak_value(peak, peak.center) == pytest.approx(peak.height, abs=1e-9)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(center=-0.1, width=0.1, height=0.5),
            dict(center=0.5, width=0.0, height=0.5),
            dict(center=0.5, width=0.6, height=0.5),
            dict(center=0.5, width=0.1, height=1.5),
            dict(center=0.5, width=0.1, height=0.5, color=(1.2, 0, 0)),
        ],
    )
    def test_invariant_violations_rejected(self, kwargs):
        with pytest.raises((TransferFunctionError, ValueError)):
            Peak(**kwargs)


class TestEvaluate:
    def test_empty_tf_is_transparent(self):
        assert tf_evaluate(TransferFunction(), 0.5) == (0.0, 0.0, 0.0, 0.0)

    def test_single_peak_passes_through(self):
        tf = TransferFunction([Peak(0.5, 0.2, 0.8, (0.0, 1.0, 0.0))])
        r, g, b, a = tf_evaluate(tf, 0.5)
        assert (r, g, b) == pytest.approx((0.0, 1.0, 0.0))
        assert a == pytest.approx(0.8, abs=1e-12)

    def test_two_overlapping_peaks_hand_oracle(self):
        # red alpha 0.5 under blue alpha 0.5: A = 0.75, C = (1/3, 0, 2/3)
        tf = TransferFunction(
            [Peak(0.5, 0.2, 0.5, (1.0, 0.0, 0.0)), Peak(0.5, 0.2, 0.5, (0.0, 0.0, 1.0))]
        )
        r, g, b, a = tf_evaluate(tf, 0.5)
        assert a == pytest.approx(0.75, abs=1e-9)
        assert (r, g, b) == pytest.approx((1 / 3, 0.0, 2 / 3), abs=1e-9)

    @settings(max_examples=300, deadline=None)
    @given(tf_st, st.floats(0.0, 1.0))
    def test_alpha_product_law(self, tf, x):
        product = 1.0
        for peak in tf.peaks:
            if peak.enabled:
                product *= 1.0 - peak.value(x)
        assert tf_evaluate(tf, x)[3] == pytest.approx(1.0 - product, abs=1e-9)

    @settings(max_examples=200, deadline=None)
    @given(tf_st, st.floats(0.0, 1.0))
    def test_alpha_in_unit_range(self, tf, x):
        assert 0.0 <= tf_evaluate(tf, x)[3] <= 1.0

    @settings(max_examples=150, deadline=None)
    @given(tf_st, st.floats(0.0, 1.0), st.integers(0, MAX_PEAKS - 1))
    def test_disabled_equals_deleted(self, tf, x, index):
        if not tf.peaks:
            return
        index %= len(tf.peaks)
        disabled = tf.copy()
        disabled.peaks[index].enabled = False
        deleted = tf.copy()
        del deleted.peaks[index]
        deleted.selected = None
        disabled.selected = None
        assert tf_evaluate(disabled, x) == pytest.approx(tf_evaluate(deleted, x), abs=1e-12)

    def test_all_disabled_is_transparent(self):
        tf = TransferFunction([Peak(0.5, 0.2, 0.9, enabled=False)])
        assert tf_evaluate(tf, 0.5) == (0.0, 0.0, 0.0, 0.0)


class TestLut:
    def test_empty_tf_lut_transparent(self):
        lut = TransferFunction().build_lut()
        assert len(lut) == LUT_SIZE
        assert not lut.rgba.any()

    def test_entries_equal_bin_center_evaluation(self):
        tf = TransferFunction([Peak(0.5, 0.2, 1.0, (1.0, 0.5, 0.0))])
        lut = tf.build_lut()
        # independent re-evaluation at the documented bin centers
        for k in [0, 64, 127, 128, 200, 255]:
            x = (k + 0.5) / LUT_SIZE
            assert tuple(lut.rgba[k]) == pytest.approx(tf.evaluate(x), abs=0)

    def test_entry_128_documented_example(self):
        tf = TransferFunction([Peak(0.5, 0.2, 1.0)])
        lut = tf.build_lut()
        x = 128.5 / 256
        expected = 1.0 * math.sin(math.pi / (2 * 0.2) * (x - 0.5 + 0.2))
        assert lut.rgba[128, 3] == pytest.approx(expected, abs=1e-12)

    def test_sample_uses_nearest_bin(self):
        tf = TransferFunction([Peak(0.5, 0.1, 0.7)])
        lut = tf.build_lut()
        assert lut.sample(0.0) == tuple(lut.rgba[0])
        assert lut.sample(1.0) == tuple(lut.rgba[255])
        assert lut.sample(100.7 / 256) == tuple(lut.rgba[100])

    @settings(max_examples=150, deadline=None)
    @given(tf_st, st.floats(0.0, 1.0))
    def test_lut_error_within_slope_bound(self, tf, x):
        # nearest-bin quantization moves x by at most 1/512; alpha and the
        # premultiplied channels are Lipschitz with the summed slope bound
        bound = tf.slope_bound() * (1 / 512) + 1e-6
        lr, lg, lb, la = tf.build_lut().sample(x)
        dr, dg, db, da = tf.evaluate(x)
        assert abs(la - da) <= bound
        assert abs(lr * la - dr * da) <= bound
        assert abs(lg * la - dg * da) <= bound
        assert abs(lb * la - db * da) <= bound


class TestEditing:
    def test_add_to_empty_selects(self):
        tf = TransferFunction()
        tf.add_peak((0.0, 1.0, 0.0))
        assert len(tf) == 1 and tf.selected == 0

    def test_add_appends_and_selects(self):
        tf = TransferFunction([Peak(0.2, 0.05, 0.5), Peak(0.6, 0.05, 0.5)])
        tf.add_peak((1.0, 0.0, 0.0))
        assert len(tf) == 3 and tf.selected == 2
        assert tf.peaks[2].color == (1.0, 0.0, 0.0)

    def test_add_defaults(self):
        tf = TransferFunction()
        peak = tf.add_peak()
        assert (peak.center, peak.width, peak.height) == (0.5, 0.1, 0.8)
        assert peak.enabled

    def test_capacity_cap(self):
        tf = TransferFunction()
        for _ in range(MAX_PEAKS):
            tf.add_peak()
        with pytest.raises(TransferFunctionError, match="8"):
            tf.add_peak()

    def test_default_colors_follow_palette(self):
        tf = TransferFunction()
        for expected in PALETTE:
            assert tf.add_peak().color == expected

    def test_delete_selects_previous(self):
        tf = TransferFunction([Peak(0.2, 0.05, 0.5)] * 3, selected=1)
        tf.delete_selected()
        assert len(tf) == 2 and tf.selected == 0

    def test_delete_last_clears_selection(self):
        tf = TransferFunction([Peak(0.2, 0.05, 0.5)], selected=0)
        tf.delete_selected()
        assert len(tf) == 0 and tf.selected is None

    def test_delete_without_selection_raises(self):
        with pytest.raises(TransferFunctionError):
            TransferFunction([Peak(0.2, 0.05, 0.5)]).delete_selected()

    def test_select_next_cycles(self):
        tf = TransferFunction([Peak(0.2, 0.05, 0.5)] * 3, selected=2)
        assert tf.select_next() == 0
        assert tf.select_next() == 1

    def test_select_next_single_peak_stays(self):
        tf = TransferFunction([Peak(0.2, 0.05, 0.5)], selected=0)
        assert tf.select_next() == 0

    def test_toggle_flips(self):
        tf = TransferFunction([Peak(0.2, 0.05, 0.5)], selected=0)
        assert tf.toggle_selected_enabled() is False
        assert tf.toggle_selected_enabled() is True

    def test_cycle_color_advances_palette(self):
        tf = TransferFunction([Peak(0.2, 0.05, 0.5, PALETTE[0])], selected=0)
        assert tf.cycle_selected_color() == PALETTE[1]
        assert tf.cycle_selected_color() == PALETTE[2]

    def test_cycle_color_from_custom_color_enters_palette(self):
        tf = TransferFunction([Peak(0.2, 0.05, 0.5, (0.123, 0.4, 0.9))], selected=0)
        assert tf.cycle_selected_color() in PALETTE


class TestJson:
    def test_round_trip_preserves_everything(self):
        tf = TransferFunction(
            [
                Peak(0.25, 0.08, 0.3, (0.0, 0.0, 1.0)),
                Peak(0.85, 0.04, 0.9, (0.0, 1.0, 0.0), enabled=False),
            ],
            selected=1,
        )
        assert TransferFunction.from_json(tf.to_json()) == tf

    @settings(max_examples=150, deadline=None)
    @given(tf_st)
    def test_round_trip_property(self, tf):
        assert TransferFunction.from_json(tf.to_json()) == tf

    def test_field_names_are_exact(self):
        tf = TransferFunction([Peak(0.5, 0.1, 0.8, (1.0, 0.0, 0.0))], selected=0)
        obj = json.loads(tf.to_json())
        assert set(obj) == {"peaks", "selected"}
        assert set(obj["peaks"][0]) == {"center", "width", "height", "color", "enabled"}

    def test_zero_width_rejected(self):
        text = json.dumps(
            {"peaks": [{"center": 0.5, "width": 0.0, "height": 0.5,
                        "color": [1, 0, 0], "enabled": True}], "selected": None}
        )
        with pytest.raises(TransferFunctionFormatError, match="width"):
            TransferFunction.from_json(text)

    def test_nine_peaks_rejected(self):
        peak = {"center": 0.5, "width": 0.1, "height": 0.5, "color": [1, 0, 0], "enabled": True}
        text = json.dumps({"peaks": [peak] * 9, "selected": 0})
        with pytest.raises(TransferFunctionFormatError, match="8"):
            TransferFunction.from_json(text)

    def test_bad_selection_rejected(self):
        peak = {"center": 0.5, "width": 0.1, "height": 0.5, "color": [1, 0, 0], "enabled": True}
        with pytest.raises(TransferFunctionFormatError, match="selected"):
            TransferFunction.from_json(json.dumps({"peaks": [peak], "selected": 3}))

    def test_diagnostics_name_the_offending_peak(self):
        peak = {"center": 0.5, "width": 0.1, "height": 0.5, "color": [1, 0, 0], "enabled": True}
        bad = dict(peak, width=-1)
        with pytest.raises(TransferFunctionFormatError, match=r"peaks\[1\]"):
            TransferFunction.from_json(json.dumps({"peaks": [peak, bad], "selected": None}))

    def test_not_json_rejected(self):
        with pytest.raises(TransferFunctionFormatError):
            TransferFunction.from_json("not json {")


class TestLookupTableType:
    def test_validates_shape_and_range(self):
        with pytest.raises(ValueError):
            LookupTable(np.zeros((16, 4)))
        with pytest.raises(ValueError):
            LookupTable(np.full((256, 4), 2.0))
