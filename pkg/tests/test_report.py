import json
import math

import numpy as np
import pytest
from gurevich_lab.report import Report, emit_report
from gurevich_lab.storage import StorageManager

from tests.utils import get_test_container


def sample_report() -> Report:
    report = Report("sample", "entropy", "abc")
    report.set_result("value", 0.48121182505960347)
    report.set_result("flag", True)
    report.set_result("never", -math.inf)
    report.set_result("vector", np.array([1 / 3, 2 / 3]))
    report.add_table("counts", ["n", "count", "tv"], [[1, 0, None], [2, 4, 0.1234567890123456]])
    return report


class TestReport:
    def test_required_keys(self) -> None:
        report = Report("sample", "entropy", "abc")
        assert set(report) == {
            "schema_version",
            "name",
            "kind",
            "config_hash",
            "results",
            "tables",
        }
        assert report.name == "sample"
        assert report.kind == "entropy"

    def test_attribute_access(self) -> None:
        report = Report("sample", "entropy", "abc")
        with pytest.raises(AttributeError):
            report.missing  # noqa: B018

    def test_table_rows_must_match_columns(self) -> None:
        report = Report("sample", "entropy", "abc")
        with pytest.raises(ValueError):
            report.add_table("bad", ["n", "count"], [[1]])

    def test_frozen_report(self) -> None:
        report = sample_report()
        report._freeze()
        with pytest.raises(TypeError):
            report["name"] = "other"
        with pytest.raises(TypeError):
            report.set_result("value", 1.0)
        with pytest.raises(TypeError):
            report.add_table("more", ["n"], [[1]])
        with pytest.raises(TypeError):
            del report["name"]
        report._thaw()
        report.set_result("value", 1.0)
        assert report.results["value"] == 1.0

    def test_json_encoding(self) -> None:
        payload = json.loads(sample_report().to_json())
        assert payload["results"]["value"] == 0.481211825060
        assert payload["results"]["never"] == "-inf"
        assert payload["results"]["flag"] is True
        assert payload["results"]["vector"] == [0.333333333333, 0.666666666667]
        assert payload["tables"]["counts"]["rows"][1] == [2, 4, 0.123456789012]

    def test_json_is_canonical(self) -> None:
        text = sample_report().to_json()
        assert text.endswith("\n")
        assert text == sample_report().to_json()
        assert text.index('"config_hash"') < text.index('"kind"')

    def test_table_csv(self) -> None:
        assert sample_report().table_csv("counts") == "n,count,tv\n1,0,\n2,4,0.123456789012\n"


class TestEmitReport:
    def setup_method(self, method) -> None:
        StorageManager.clear()

    def test_json(self, tmp_path) -> None:
        StorageManager.add_storage("reports", get_test_container(str(tmp_path)))
        stored = emit_report(sample_report())
        assert [artifact.name for artifact in stored] == ["sample.json"]
        assert json.loads((tmp_path / "sample.json").read_text())["name"] == "sample"

    def test_csv(self, tmp_path) -> None:
        StorageManager.add_storage("reports", get_test_container(str(tmp_path)))
        stored = emit_report(sample_report(), format="csv")
        assert [artifact.name for artifact in stored] == ["sample.json", "sample.counts.csv"]
        assert (tmp_path / "sample.counts.csv").read_text().startswith("n,count,tv\n")

    def test_unknown_format(self, tmp_path) -> None:
        StorageManager.add_storage("reports", get_test_container(str(tmp_path)))
        with pytest.raises(ValueError):
            emit_report(sample_report(), format="xml")
