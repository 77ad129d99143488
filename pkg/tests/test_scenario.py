import json
import math

import numpy as np
import pytest

from toalab.emit import read_csv, to_csv, to_svg
from toalab.report import COLUMNS, ResultTable, parse_which, peak_table, run, summary_lines
from toalab.scenario import FIG2, FIG3, ConfigError, ScenarioConfig


def test_presets():
    assert (FIG3.N, FIG3.sigma, FIG3.L, FIG3.v, FIG3.epsilon) == (10, 5.0, 50.0, 1.0, 0.01)
    assert (FIG2.N, FIG2.epsilon) == (5, 0.05)
    r = FIG3.resolved()
    assert (r.t_max, r.n_steps) == (550.0, 20000)


def test_from_dict_overlays_base():
    cfg = ScenarioConfig.from_dict({"N": 3}, base=FIG2)
    assert cfg.N == 3 and cfg.epsilon == FIG2.epsilon


@pytest.mark.parametrize("data", [{"n": 3}, {"sigma": 5.0, "seed": 1}, {"nsteps": 10}])
def test_unknown_keys_rejected(data):
    with pytest.raises(ConfigError, match="unknown"):
        ScenarioConfig.from_dict(data)


@pytest.mark.parametrize("data", [
    {"N": 2.0}, {"N": True}, {"sigma": "5"}, {"L": math.inf}, {"v": math.nan},
    {"n_steps": 10.5}, {"sigma": -1.0}, {"v": -1.0}, {"lambda0": 0.0}, {"t_max": -5.0},
])
def test_invalid_values_rejected(data):
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict(data)


def test_from_dict_needs_object():
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict([1, 2])


def test_from_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"N": 4, "epsilon": 0.02}))
    cfg = ScenarioConfig.from_json(p)
    assert (cfg.N, cfg.epsilon, cfg.sigma) == (4, 0.02, 5.0)
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        ScenarioConfig.from_json(p)


def test_resolution_check():
    ScenarioConfig().check_resolution()
    with pytest.raises(ConfigError, match="under-resolved"):
        ScenarioConfig(n_steps=50).check_resolution()


def test_to_dict_has_exactly_the_fields():
    assert set(FIG3.to_dict()) == {"N", "sigma", "L", "v", "epsilon", "lambda0", "lambda_prime",
                                   "dL", "dt_jn", "t_max", "n_steps"}


def test_parse_which():
    assert parse_which("qf, w") == {"qf", "w"}
    for bad in ("", "qf,xx", ","):
        with pytest.raises(ValueError):
            parse_which(bad)


@pytest.fixture(scope="module")
def fig3_table():
    return run(FIG3, ("qf", "w", "ms", "jn", "expected"))


def test_run_metadata(fig3_table):
    m = fig3_table.metadata
    assert m["config"] == FIG3.resolved().to_dict()
    assert m["tau0"] == 50.0
    assert m["no_spreading_margin"] == pytest.approx(0.2)
    assert set(m["p_nondetect"]) == {"qf", "w", "ms", "jn", "expected"}
    assert all(len(m["peaks"][k]) == 10 for k in m["peaks"])
    assert m["notes"] == []


def test_run_columns_in_canonical_order(fig3_table):
    assert fig3_table.names == ["qf", "w", "ms", "jn", "expected"]


def test_run_rejects_bad_requests():
    with pytest.raises(ValueError):
        run(FIG3, ())
    with pytest.raises(ValueError):
        run(FIG3, ("qf", "nope"))
    with pytest.raises(ConfigError):
        run(ScenarioConfig(n_steps=50), ("qf",))


def test_run_notes_unresolved_comb():
    with pytest.warns(UserWarning, match="semiclassical"):
        table = run(FIG3, ("sc",))
    assert table.metadata["notes"]


def test_run_notes_missing_expected_form():
    cfg = ScenarioConfig(N=3, sigma=1.0, L=5.0, v=1.0, epsilon=0.5)
    with pytest.warns(UserWarning, match="expected form"):
        table = run(cfg, ("qf", "expected"))
    assert "expected" not in table.columns


def test_summary(fig3_table):
    lines = summary_lines(fig3_table)
    assert lines[0].startswith("tau0 = 50")
    assert any("peak ratios" in ln for ln in lines)
    assert len(peak_table(fig3_table)) == 50


def test_table_validation():
    with pytest.raises(ValueError):
        ResultTable({"qf": np.zeros(3)})
    with pytest.raises(ValueError):
        ResultTable({"tau": np.zeros(3), "qf": np.zeros(2)})


def test_csv_roundtrip_is_exact(fig3_table):
    text = to_csv(fig3_table)
    lines = text.splitlines()
    assert lines[0].startswith("# {") and lines[1].startswith("# peaks ")
    assert lines[2] == "tau,qf,w,ms,jn,expected"
    back = read_csv(text)
    for name in ["tau"] + fig3_table.names:
        assert np.array_equal(back.columns[name], fig3_table.columns[name])
    assert back.metadata["config"] == fig3_table.metadata["config"]


def test_csv_omits_absent_columns():
    table = ResultTable({"tau": np.array([0.0, 1.0]), "jn": np.array([0.0, 0.1]),
                         "qf": np.array([1.0, 2.0])})
    assert to_csv(table).splitlines()[1] == "tau,qf,jn"
    with pytest.raises(ValueError):
        to_csv(ResultTable({"tau": np.zeros(2)}))


def test_csv_header_canonical_order():
    assert ",".join(("tau",) + COLUMNS) == "tau,qf,sc,w,ms,jn,expected"


def test_svg_shape(fig3_table):
    import xml.etree.ElementTree as ET
    root = ET.fromstring(to_svg(fig3_table))
    assert root.get("width") == "800" and root.get("height") == "500"
    ns = "{http://www.w3.org/2000/svg}"
    assert len(root.findall(f"{ns}polyline")) == len(fig3_table.names)
    assert json.loads(root.find(f"{ns}metadata").text)["tau0"] == 50.0


def test_svg_inset_for_semiclassical():
    import xml.etree.ElementTree as ET
    table = run(FIG2, ("qf", "sc"))
    svg = to_svg(table)
    assert "(magnified)" in svg
    ns = "{http://www.w3.org/2000/svg}"
    clips = [p.get("clip-path") for p in ET.fromstring(svg).iter(f"{ns}polyline")]
    assert "url(#inset)" in clips
    # no external references: the file stands alone
    assert "href" not in svg and "<image" not in svg
