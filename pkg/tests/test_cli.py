import json

import pytest

from core import config
from glw.cli import SCHEMAS, run
from tests.conftest import fixture_path

W5 = fixture_path("w5.gcat")
DUAL = fixture_path("d.gcat")


def test_homs_text(capsys):
    assert run(["homs", W5]) == 0
    out = capsys.readouterr().out
    assert "v2 -> v2: 1, b2.a2" in out


def test_homs_json(capsys):
    assert run(["homs", W5, "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["dims"]["v2"] == [0, 1, 2, 1, 0]
    assert report["bases"]["v2"]["v1"] == ["b1"]


def test_ideals_text(capsys):
    assert run(["ideals", W5, "--object", "v2"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("7 ideals of Hom(v2, -)")
    assert "hasse: 0<1 0<2 1<3 1<4 2<4 3<5 4<5 5<6" in out


def test_ideals_json(capsys):
    assert run(["ideals", W5, "--object", "v2", "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert [row["dims"] for row in report["ideals"]][-1] == [0, 1, 2, 1, 0]
    assert report["ideals"][5]["contains"] == [3, 4]


def test_ideals_dot(capsys):
    assert run(["ideals", W5, "--object", "v2", "--dot"]) == 0
    out = capsys.readouterr().out
    assert out.startswith('digraph "ideals_v2"')
    assert '"5" -> "6";' in out
    assert run(["ideals", DUAL, "--object", "o", "--format", "dot"]) == 0
    assert '"1" [label="(1)"];' in capsys.readouterr().out


def test_dot_only_for_ideals(capsys):
    assert run(["homs", W5, "--format", "dot"]) == 2


def test_unknown_object(capsys):
    assert run(["ideals", W5, "--object", "v9"]) == 2
    assert "unknown object" in capsys.readouterr().err


def test_missing_file(capsys):
    assert run(["homs", "no-such-file.gcat"]) == 2


def test_bad_category_names_the_file(tmp_path, capsys):
    bad = tmp_path / "bad.gcat"
    bad.write_text("field 4\nnilpotency 2\nobject x\n")
    assert run(["homs", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "bad.gcat" in err
    assert "not prime" in err


def test_usage_errors():
    assert run([]) == 2
    assert run(["homs"]) == 2


def test_check_filter(capsys):
    assert run(["check-filter", DUAL, fixture_path("d_epsilon.gfil")]) == 0
    out = capsys.readouterr().out
    assert "T1 pass" in out
    assert "T4 FAIL at o" in out
    assert "linear: yes, gabriel: no" in out


def test_check_filter_json(capsys):
    assert run(["check-filter", W5, fixture_path("window_filter.gfil"), "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["verdicts"][0]["witness"]["object"] == "v1"
    assert not report["linear"]


def test_filter_census(capsys):
    assert run(["filters", DUAL]) == 0
    assert capsys.readouterr().out.startswith("2 Gabriel filters")
    assert run(["filters", DUAL, "--linear", "--format", "json"]) == 0
    assert len(json.loads(capsys.readouterr().out)["filters"]) == 3


def test_torsion(capsys):
    module = fixture_path("w5_rep_v2.gmod")
    assert run(["torsion", W5, fixture_path("w5_trivial.gfil"), module]) == 0
    out = capsys.readouterr().out
    assert "torsion: no" in out
    assert "radical dims: (0,0,0,0,0)" in out


def test_localize(capsys):
    module = fixture_path("w5_rep_v2.gmod")
    assert run(["localize", W5, fixture_path("w5_trivial.gfil"), module, "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["localized_dims"] == [0, 1, 2, 1, 0]
    assert report["delta_kernel_dims"] == [0, 0, 0, 0, 0]
    assert report["module"].startswith("module over w5.gcat")


def test_localize_rejects_non_gabriel_filter(capsys):
    module = fixture_path("w5_rep_v2.gmod")
    assert run(["localize", W5, fixture_path("window_filter.gfil"), module]) == 2
    assert "not a Gabriel filter" in capsys.readouterr().err


def test_closed(capsys):
    module = fixture_path("w5_rep_v2.gmod")
    assert run(["closed", W5, fixture_path("w5_trivial.gfil"), module]) == 0
    assert capsys.readouterr().out.strip() == "closed: yes"


def test_verify(capsys):
    argv = ["verify", DUAL, fixture_path("d_trivial.gfil"), "--samples", "3", "--dmax", "2", "--seed", "7"]
    assert run(argv) == 0
    out = capsys.readouterr().out
    assert out.startswith("seed 7, 3 samples")
    assert out.rstrip().endswith("all checks passed")


def test_verify_text_is_reproducible(capsys):
    argv = ["verify", DUAL, fixture_path("d_epsilon.gfil"), "--samples", "3", "--dmax", "2", "--seed", "2"]
    run(argv)
    first = capsys.readouterr().out
    run(argv)
    assert capsys.readouterr().out == first
    assert "skipped" in first


def test_verify_census(capsys):
    assert run(["verify", DUAL, "--census", "--samples", "3", "--dmax", "3", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("2 Gabriel filters, seed 1, 3 samples")
    assert out.rstrip().endswith("all filters passed")
    assert run(["verify", DUAL, "--census", "--samples", "2", "--format", "json"]) == 0
    assert len(json.loads(capsys.readouterr().out)["reports"]) == 2


def test_verify_needs_filter_or_census(capsys):
    assert run(["verify", DUAL]) == 2
    assert run(["verify", DUAL, fixture_path("d_trivial.gfil"), "--census"]) == 2
    assert "either a filter file or --census" in capsys.readouterr().err


def test_cap_is_restored():
    before = config.GLW_CAP
    run(["homs", DUAL, "--cap", "2"])
    assert config.GLW_CAP == before


def test_example(capsys):
    assert run(["example", "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert len(report["lattice"]["ideals"]) == 7
    names = [c["name"] for c in report["candidates"]]
    assert names == ["literal", "upclose", "upclose+meet", "gabriel"]
    assert all(c["witnesses_confirmed"] for c in report["candidates"])
    last = report["candidates"][-1]
    assert last["axioms"]["gabriel"]
    assert last["localized_dims"] == [0, 0, 0, 0, 0]
    assert last["representable_torsion"] is True


@pytest.mark.parametrize("name", sorted(SCHEMAS))
def test_schema(name, capsys):
    assert run(["schema", name]) == 0
    assert "properties" in json.loads(capsys.readouterr().out)


def test_schema_listing_and_unknown(capsys):
    assert run(["schema"]) == 0
    assert "verify" in capsys.readouterr().out.split()
    assert run(["schema", "nothing"]) == 2
