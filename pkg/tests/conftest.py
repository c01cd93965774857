from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from callcheck.graphs import ICFG, build_icfg  # noqa: E402
from callcheck.ir import Module, parse_module  # noqa: E402
from callcheck.pts import ConstraintSet, PointsToState, generate_constraints, solve  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


def fixture_path(name: str) -> Path:
    return FIXTURES / name


def load_module(name: str) -> Module:
    path = FIXTURES / f"{name}.ll"
    return parse_module(path.read_text(), source=str(path))


@dataclass
class Analysis:
    module: Module
    constraints: ConstraintSet
    state: PointsToState
    icfg: ICFG


def analyze_text(text: str, k: int = 0, entry: str = "main") -> Analysis:
    m = parse_module(text)
    cs = generate_constraints(m)
    s = solve(cs, m, k=k, entry=entry)
    return Analysis(m, cs, s, build_icfg(m, s))


def analyze_fixture(name: str, k: int = 0) -> Analysis:
    m = load_module(name)
    cs = generate_constraints(m)
    s = solve(cs, m, k=k)
    return Analysis(m, cs, s, build_icfg(m, s))


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


ALL_FIXTURES = ["branched_funptr", "branched_funptr_order", "funptr", "funptr_order",
                "id_function", "socket", "socket_noclose"]


# -- acceptance summary ------------------------------------------------------------

ACCEPTANCE_RESULTS: dict[int, str] = {}


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    line = f"AC{number} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_RESULTS[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[n])
