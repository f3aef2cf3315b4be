import hashlib

import pytest

from spillkit.core.utils import level_label, parse_float_list, sha256_file


class TestLevelLabel:
    def test_mean(self):
        assert level_label("mean") == "mean"

    @pytest.mark.parametrize(
        "tau, expected", [(0.05, "q0.05"), (0.5, "q0.5"), (0.95, "q0.95")]
    )
    def test_quantiles(self, tau, expected):
        assert level_label(tau) == expected


class TestParseFloatList:
    def test_spaces_and_empty_items(self):
        assert parse_float_list(" 0.05, ,0.95 ") == [0.05, 0.95]

    def test_rejects_words(self):
        with pytest.raises(ValueError, match="'abc'"):
            parse_float_list("0.5,abc")


def test_sha256_file(tmp_path):
    path = tmp_path / "blob.bin"
    path.write_bytes(b"spillover")
    assert sha256_file(path) == hashlib.sha256(b"spillover").hexdigest()
