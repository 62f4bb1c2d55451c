import numpy as np
import pytest

from csrsma.alphabet import (
    Alphabet,
    TransmissionMode,
    make_constellation,
    mode_from_name,
    modes_for_complexity,
    product_alphabet,
)


def names(modes):
    return [(m.private.name, m.common.name) for m in modes]


class TestConstellations:
    @pytest.mark.parametrize("kind,order", [("bpsk", 2), ("qpsk", 4), ("qam8", 8), ("qam16", 16)])
    def test_unit_power(self, kind, order):
        a = make_constellation(kind)
        assert a.order == order
        assert a.power == pytest.approx(1.0, abs=1e-14)
        assert len(np.unique(np.round(a.points, 12))) == order

    def test_null(self):
        a = make_constellation("null")
        assert a.order == 1 and a.is_null and a.power == 0.0

    @pytest.mark.parametrize("alias,name", [("16QAM", "qam16"), ("8qam", "qam8"), ("{0}", "null"), ("4qam", "qpsk")])
    def test_aliases(self, alias, name):
        assert make_constellation(alias).name == name

    def test_unknown(self):
        with pytest.raises(ValueError, match="unknown constellation"):
            make_constellation("qam32")

    def test_points_read_only(self):
        with pytest.raises(ValueError):
            make_constellation("qpsk").points[0] = 0

    @pytest.mark.parametrize("kind", ["qpsk", "qam16"])
    def test_gray_labels(self, kind):
        # nearest neighbours differ in exactly one label bit
        pts = make_constellation(kind).points
        d = np.abs(pts[:, None] - pts[None, :])
        dmin = d[d > 0].min()
        for a, b in zip(*np.nonzero(np.isclose(d, dmin))):
            assert bin(a ^ b).count("1") == 1

    def test_equality(self):
        assert make_constellation("qpsk") == make_constellation("QPSK")
        assert make_constellation("qpsk") != make_constellation("bpsk")
        assert hash(make_constellation("qpsk")) == hash(make_constellation("qpsk"))


class TestProductAlphabet:
    def test_cardinality_and_order(self):
        b, q = make_constellation("bpsk"), make_constellation("qpsk")
        V = product_alphabet([b, q])
        assert V.order == 8 and V.dims == 2
        np.testing.assert_array_equal(V.vectors[:4, 0], b.points[0])
        np.testing.assert_array_equal(V.powers, [1.0, 1.0])

    def test_empty(self):
        V = product_alphabet([])
        assert V.order == 1 and V.dims == 0 and V.vectors.shape == (1, 0)

    def test_null_component(self):
        V = product_alphabet([make_constellation("null"), make_constellation("bpsk")])
        assert V.order == 2
        np.testing.assert_array_equal(V.powers, [0.0, 1.0])


class TestModes:
    def test_delta_4(self):
        assert names(modes_for_complexity(4)) == [("qpsk", "null"), ("bpsk", "bpsk"), ("null", "qpsk")]

    def test_delta_16(self):
        assert names(modes_for_complexity(16)) == [
            ("qam16", "null"), ("qam8", "bpsk"), ("qpsk", "qpsk"), ("bpsk", "qam8"), ("null", "qam16")]

    def test_delta_2(self):
        assert names(modes_for_complexity(2)) == [("bpsk", "null"), ("null", "bpsk")]

    @pytest.mark.parametrize("delta", [2, 4, 8, 16])
    def test_endpoints_and_caps(self, delta):
        modes = modes_for_complexity(delta)
        assert modes[0].is_sdma and modes[-1].is_multicast
        for m in modes:
            assert m.complexity == delta
            assert m.rate_cap_bits == pytest.approx(np.log2(delta))

    @pytest.mark.parametrize("delta", [0, 1, 3, 12, 32])
    def test_invalid_delta(self, delta):
        with pytest.raises(ValueError):
            modes_for_complexity(delta)

    def test_mode_names(self):
        m = mode_from_name("qam8/bpsk")
        assert isinstance(m, TransmissionMode) and m.name == "qam8/bpsk" and str(m) == "qam8/bpsk"
        assert m.complexity == 16
        with pytest.raises(ValueError):
            mode_from_name("qpsk")
        with pytest.raises(ValueError):
            mode_from_name("null/null")

    def test_alphabet_repr(self):
        assert repr(make_constellation("bpsk")) == "Alphabet('bpsk', order=2)"
        assert isinstance(make_constellation("bpsk"), Alphabet)
