import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from intrecover.images import ImageFormatError, format_pgm, parse_pgm, qr_like


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 9), st.integers(1, 9), st.sampled_from([1, 13, 255, 256, 65535]), st.booleans(),
       st.integers(0, 2**32 - 1))
def test_canonical_files_round_trip_byte_for_byte(h, w, maxval, binary, seed):
    img = np.random.default_rng(seed).integers(0, maxval + 1, (h, w))
    data = format_pgm(img, maxval, binary)
    back, mv = parse_pgm(data)
    assert mv == maxval and np.array_equal(back, img)
    assert format_pgm(back, mv, binary) == data


def test_comments_and_whitespace():
    data = b"P2\n# made by hand\n3 2 # width height\n7\n0 1 2\n# row two\n3 4 7\n"
    img, mv = parse_pgm(data)
    assert mv == 7 and img.tolist() == [[0, 1, 2], [3, 4, 7]]


def test_sixteen_bit_binary_is_big_endian():
    img, mv = parse_pgm(b"P5 2 1 65535\n" + bytes([1, 2, 0, 255]))
    assert mv == 65535 and img.tolist() == [[258, 255]]


@pytest.mark.parametrize("data", [b"P6 1 1 255\n\x00\x00\x00", b"P5 2 2 255\n\x00", b"P2 2 1 5\n1 9\n",
                                  b"P2 2 1 70000\n1 2\n", b"P2 2 x 5\n1 2\n", b""])
def test_bad_files(data):
    with pytest.raises(ImageFormatError):
        parse_pgm(data)


def test_qr_like_shape():
    img = qr_like(45, 7)
    assert img.shape == (45, 45) and set(np.unique(img)) <= {0, 1}
    assert img[:7, :7].sum() == img[:7, -7:].sum() == img[-7:, :7].sum()
    assert np.array_equal(qr_like(45, 7), img)
