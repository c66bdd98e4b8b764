import json
import math
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from blab.cli import main
from blab.errors import ConfigError
from blab.io import (
    dumps,
    measure_from_json,
    measure_to_json,
    sequence_from_json,
    weight_from_json,
    weight_to_json,
)
from blab.weights import (
    CircleMeasure,
    Const,
    GridDensity,
    InverseSquareDensity,
    LogAtom,
    LogOnePlusSq,
    LogPotential,
    PlanarMeasure,
    RadialPoly,
    RadialPowerDensity,
    WeightExpr,
)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _full_weight():
    g = GridDensity.from_function(lambda z: 1 + np.abs(z) ** 2, 0.4, 8, 8)
    mu = PlanarMeasure(
        ((0.2, 0.1 + 0.1j),),
        (RadialPowerDensity(0.5, 1.0, 0.5), InverseSquareDensity(0.3, 0.5), CircleMeasure(0.1, 0.3), g),
        0.6,
    )
    return WeightExpr((RadialPoly(1.5, 2), LogAtom(0.4, -0.2j), LogPotential(mu, 0.6), Const(-0.5), LogOnePlusSq(0.3)))


def test_weight_round_trip():
    w = _full_weight()
    back = weight_from_json(json.loads(dumps(weight_to_json(w))))
    z = np.array([0.0 + 0.05j, 0.35, 1 + 1j, -2.0])
    assert np.array_equal(back(z), w(z))
    assert weight_to_json(back) == weight_to_json(w)


def test_measure_round_trip():
    mu = PlanarMeasure(((0.5, 0.2j),), (RadialPowerDensity(1.0, 0.0, 0.5),), 1.0)
    back = measure_from_json(json.loads(dumps(measure_to_json(mu))))
    assert back.atoms == mu.atoms and back.total_mass == mu.total_mass


def test_weight_from_file(tmp_path):
    (tmp_path / "w.json").write_text(json.dumps({"terms": [{"kind": "radial_poly", "coeff": 2.0}]}))
    assert weight_from_json("w.json", tmp_path)(1.0) == 2.0


@pytest.mark.parametrize(
    "doc",
    [
        {"terms": [{"kind": "bogus"}]},
        {"terms": [{"kind": "radial_poly"}]},
        {"terms": [{"kind": "radial_poly", "coeff": "x"}]},
        {"terms": [{"kind": "radial_poly", "coeff": 1, "power": 1.5}]},
        {"terms": [{"kind": "log_atom", "mass": 1, "center": [1, 2, 3]}]},
        {"terms": [{"kind": "log_potential", "radius": 1, "measure": {"atoms": [[1, [0, 0]]]}}]},
        {"nope": []},
        "missing_file.json",
    ],
)
def test_bad_weights(doc, tmp_path):
    with pytest.raises(ConfigError):
        weight_from_json(doc, tmp_path)


def test_sequences():
    lim = {"terms": [{"kind": "radial_poly", "coeff": 1.0}]}
    seq = sequence_from_json({"kind": "scaled", "limit": lim})
    assert seq(4)(1.0) == pytest.approx(0.75)
    assert sequence_from_json({"kind": "shifted", "limit": lim})(2)(0.0) == -0.5
    with pytest.raises(ConfigError):
        sequence_from_json({"kind": "other", "limit": lim})


def test_dumps_sorted_and_numpy():
    text = dumps({"b": np.float64(1.5), "a": np.arange(2), "c": 1j})
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [0, 1], "b": 1.5, "c": [0.0, 1.0]}


# --- command line -------------------------------------------------------------


def _write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(path)


def test_run_kernel_convergence(tmp_path):
    prefix = tmp_path / "out" / "k"
    res = CliRunner().invoke(main, ["run", str(CONFIGS / "kernel_convergence.json"), "--out", str(prefix)])
    assert res.exit_code == 0, res.output
    assert "FAIL" not in res.output
    rows = Path(f"{prefix}.csv").read_text().splitlines()
    assert rows[0] == "point_re,point_im,j,degree,K_j,K_limit,gap"
    assert len(rows) == 1 + 3 * 32
    doc = json.loads(Path(f"{prefix}.json").read_text())
    assert doc["passed"] and doc["report"]["diagnostics"][0]["gram_condition"] is not None


def test_run_section2_with_threads(tmp_path):
    res = CliRunner().invoke(main, ["run", str(CONFIGS / "section2_bounds.json"), "--out", str(tmp_path / "s"),
                                    "--threads", "2"])
    assert res.exit_code == 0, res.output
    assert res.output.count("PASS") == 3


@pytest.mark.parametrize(
    "text",
    ["{not json", json.dumps({"experiment": "unknown"}), json.dumps({"experiment": "kernel_convergence"}),
     json.dumps({"experiment": "discretization_study", "seed": "x"}),
     json.dumps({"experiment": "kernel_convergence", "params": {"degree": 33},
                 "sequence": {"kind": "scaled", "limit": {"terms": [{"kind": "radial_poly", "coeff": 1}]}}}),
     json.dumps({"experiment": "kernel_convergence", "params": {"j_max": 1001},
                 "sequence": {"kind": "scaled", "limit": {"terms": [{"kind": "radial_poly", "coeff": 1}]}}}),
     json.dumps({"experiment": "section2_bounds", "params": {"n_r": 2048}})],
)
def test_malformed_config_exit_2_without_files(tmp_path, text):
    cfg = _write(tmp_path, text)
    prefix = tmp_path / "o" / "x"
    res = CliRunner().invoke(main, ["run", cfg, "--out", str(prefix)])
    assert res.exit_code == 2
    assert not (tmp_path / "o").exists()


def test_missing_config_exit_2(tmp_path):
    assert CliRunner().invoke(main, ["run", str(tmp_path / "absent.json")]).exit_code == 2


def test_numerical_failure_exit_3(tmp_path):
    doc = {"experiment": "kernel_convergence", "params": {"degree": 3, "j_max": 2},
           "sequence": {"kind": "constant", "limit": {"terms": [{"kind": "log_atom", "mass": 1, "center": [0, 0]}]}}}
    res = CliRunner().invoke(main, ["run", _write(tmp_path, doc), "--out", str(tmp_path / "n")])
    assert res.exit_code == 3


def test_assertion_failure_exit_1(tmp_path):
    doc = {"experiment": "discretization_study", "params": {"Ns": [16, 64], "gap_threshold": 1e-9}}
    res = CliRunner().invoke(main, ["run", _write(tmp_path, doc), "--out", str(tmp_path / "d")])
    assert res.exit_code == 1
    assert "FAIL sup-gap at N=64" in res.output
    assert (tmp_path / "d.csv").exists()


def test_seed_override_changes_output(tmp_path):
    doc = {"experiment": "weight_comparison", "params": {"n_samples": 20}, "seed": 1}
    cfg = _write(tmp_path, doc)
    r = CliRunner()
    assert r.invoke(main, ["run", cfg, "--out", str(tmp_path / "a")]).exit_code == 0
    assert r.invoke(main, ["run", cfg, "--out", str(tmp_path / "b"), "--seed", "2"]).exit_code == 0
    assert r.invoke(main, ["run", cfg, "--out", str(tmp_path / "c"), "--seed", "1"]).exit_code == 0
    a, b, c = ((tmp_path / f"{x}.csv").read_bytes() for x in "abc")
    assert a == c and a != b


def test_validate(tmp_path):
    r = CliRunner()
    res = r.invoke(main, ["validate", str(CONFIGS / "hartogs_convergence.json")])
    assert res.exit_code == 0 and "hartogs_convergence" in res.output
    assert r.invoke(main, ["validate", _write(tmp_path, "[]")]).exit_code == 2


def test_grid_dump(tmp_path):
    out = tmp_path / "g.csv"
    res = CliRunner().invoke(main, ["grid-dump", str(CONFIGS / "weight_comparison.json"), "--out", str(out)])
    assert res.exit_code == 0, res.output
    rows = out.read_text().splitlines()
    assert rows[0] == "re,im,weight"
    assert sum(float(r.split(",")[2]) for r in rows[1:]) == pytest.approx(math.pi, rel=1e-12)


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.json") if "experiment" in p.read_text()))
def test_shipped_configs_validate(name):
    assert CliRunner().invoke(main, ["validate", str(CONFIGS / name)]).exit_code == 0
