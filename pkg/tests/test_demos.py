import runpy
from pathlib import Path

import pytest

DEMOS = Path(__file__).resolve().parents[1] / "demos"


def test_demos_have_gallery_headers():
    for path in sorted(DEMOS.glob("*.py")):
        lines = path.read_text().splitlines()
        assert lines[0] == '"""', path.name
        assert set(lines[2]) == {"="} and len(lines[2]) >= len(lines[1]), path.name


@pytest.mark.parametrize("name", ["network_duality", "certificates"])
def test_quick_demos_run(name, capsys):
    runpy.run_path(str(DEMOS / f"{name}.py"), run_name="__main__")
    assert capsys.readouterr().out
