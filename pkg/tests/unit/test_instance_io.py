"""Unit tests for instance files and the built-in gap instance."""

import json
import pytest
import sys
from pathlib import Path

# Add src and tests directories to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent / 'src'))
sys.path.insert(0, str(Path(__file__).parent.parent))

from exceptions import InstanceValidationError
from instance_io import (
    builtin_instance,
    dump_instance,
    gap_greedy_cost,
    gap_instance,
    gap_optimal_cost,
    instance_from_dict,
    instance_to_dict,
    load_instance,
)
from models import AlwaysOne, OrOf
from test_data import GAP_P, gap_document, greedy_closed_form, opt_closed_form


class TestInstanceFromDict:
    """Tests for instance_from_dict."""

    def test_gap_document(self):
        """Test parsing the gap instance file content."""
        instance = instance_from_dict(gap_document())
        assert instance.item_ids == ("a", "b", "c", "d")
        assert instance.p == GAP_P
        assert instance.item("a").trigger == OrOf((1, 2))
        assert isinstance(instance.item("d").trigger, AlwaysOne)
        assert instance.cost("d") == pytest.approx(1 / (1 - GAP_P))
        assert all(g.success_prob == pytest.approx(1 - GAP_P) for g in instance.ground_vars)

    def test_p_override(self):
        """Test that an explicit p wins over the file and recosts the dummy."""
        instance = instance_from_dict(gap_document(), p=0.5)
        assert instance.p == 0.5
        assert instance.cost("d") == pytest.approx(2.0)

    def test_ground_var_out_of_range(self):
        """Test that or_of may not reference ground variable 9 of 4."""
        document = gap_document()
        document["items"][0]["or_of"] = [1, 9]
        with pytest.raises(InstanceValidationError, match=r"items\[0\]\.or_of"):
            instance_from_dict(document)

    def test_negative_cost(self):
        """Test that negative costs are rejected."""
        document = gap_document()
        document["items"][1]["cost"] = -1
        with pytest.raises(InstanceValidationError, match=r"items\[1\]\.cost"):
            instance_from_dict(document)

    def test_unknown_top_level_field(self):
        """Test that unknown fields are rejected."""
        with pytest.raises(InstanceValidationError, match="unknown"):
            instance_from_dict(gap_document(extra=True))

    def test_unknown_item_field(self):
        """Test that unknown item fields are rejected."""
        document = gap_document()
        document["items"][2]["weight"] = 3
        with pytest.raises(InstanceValidationError, match=r"items\[2\]"):
            instance_from_dict(document)

    def test_both_trigger_forms(self):
        """Test that an item may not be both or_of and always_one."""
        document = gap_document()
        document["items"][0]["always_one"] = True
        with pytest.raises(InstanceValidationError, match="exactly one"):
            instance_from_dict(document)

    @pytest.mark.parametrize("p", [0, 1, "0.5", None])
    def test_bad_p(self, p):
        """Test that p must be a number strictly inside (0, 1)."""
        with pytest.raises(InstanceValidationError, match="^p:"):
            instance_from_dict(gap_document(p=p))

    def test_unsupported_utility(self):
        """Test that only hit_one is accepted in files."""
        with pytest.raises(InstanceValidationError, match="utility"):
            instance_from_dict(gap_document(utility="table"))

    def test_no_dummy(self):
        """Test that a hit-one file needs an always-one item."""
        document = gap_document()
        document["items"] = document["items"][:3]
        with pytest.raises(InstanceValidationError, match="always_one"):
            instance_from_dict(document)


class TestSerialization:
    """Tests for instance_to_dict, dump_instance and load_instance."""

    def test_round_trip(self):
        """Test that dumping and reloading gives an identical instance."""
        instance = gap_instance(0.3)
        assert instance_from_dict(json.loads(dump_instance(instance))) == instance

    def test_dummy_cost_stays_symbolic(self):
        """Test that tracked dummy costs are written as "dummy"."""
        document = instance_to_dict(gap_instance(0.3))
        assert document["items"][3] == {"id": "d", "cost": "dummy", "always_one": True}
        assert document["utility"] == "hit_one"

    def test_load_file(self, tmp_path):
        """Test loading a file from disk."""
        path = tmp_path / "gap.json"
        path.write_text(json.dumps(gap_document()), encoding="utf-8")
        assert load_instance(path) == gap_instance(GAP_P)

    def test_missing_file(self, tmp_path):
        """Test that a missing file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            load_instance(tmp_path / "missing.json")

    def test_invalid_json(self, tmp_path):
        """Test that malformed JSON names the file."""
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(InstanceValidationError, match="invalid JSON") as info:
            load_instance(path)
        assert info.value.field == str(path)

    def test_directory_path(self, tmp_path):
        """Test that an unreadable path is reported against the path."""
        with pytest.raises(InstanceValidationError, match="cannot read") as info:
            load_instance(tmp_path)
        assert info.value.field == str(tmp_path)

    def test_non_utf8_bytes(self, tmp_path):
        """Test that undecodable bytes are a validation error, not a crash."""
        path = tmp_path / "latin.json"
        path.write_bytes(b'{"p": 0.5, "name": "\xff"}')
        with pytest.raises(InstanceValidationError, match="UTF-8") as info:
            load_instance(path)
        assert info.value.field == str(path)

    def test_schema_error_names_file_and_field(self, tmp_path):
        """Test that schema errors carry both the path and the field."""
        document = gap_document()
        document["items"][1]["cost"] = 0
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(document), encoding="utf-8")
        with pytest.raises(InstanceValidationError) as info:
            load_instance(path)
        assert str(path) in str(info.value)
        assert "items[1].cost" in str(info.value)


class TestBuiltins:
    """Tests for the built-in gap instance."""

    def test_paper_builtin(self):
        """Test the built-in at the gap p: four items, dummy cost 1/(1-p)."""
        instance = builtin_instance("paper")
        assert instance.n == 4
        assert [instance.cost(e) for e in instance.item_ids[:3]] == [1.0, 1.0, 1.0]
        assert instance.cost("d") == pytest.approx(3.59841669665, rel=1e-9)

    def test_alias(self):
        """Test that gap4 names the same instance."""
        assert builtin_instance("gap4", 0.4) == builtin_instance("paper", 0.4)

    def test_unknown_builtin(self):
        """Test that unknown names are rejected."""
        with pytest.raises(InstanceValidationError, match="builtin"):
            builtin_instance("nope")

    def test_closed_forms(self):
        """Test the closed-form helpers."""
        for p in (0.1, 0.5, GAP_P):
            assert gap_optimal_cost(p) == pytest.approx(opt_closed_form(p))
            assert gap_greedy_cost(p) == pytest.approx(greedy_closed_form(p))
