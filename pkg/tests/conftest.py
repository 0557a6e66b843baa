from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from coset_topo.grp import (cyclic_action, direct_product, make_alternating, make_cyclic,  # noqa: E402
                            make_dihedral, make_psl2, make_quaternion, make_semidirect,
                            make_symmetric)
from coset_topo.pipeline import GroupContext  # noqa: E402

_BUILDERS = {
    "Q8": make_quaternion,
    "S3": lambda: make_symmetric(3),
    "S4": lambda: make_symmetric(4),
    "A4": lambda: make_alternating(4),
    "A5": lambda: make_alternating(5),
    "D8": lambda: make_dihedral(4),
    "V4": lambda: direct_product(make_cyclic(2), make_cyclic(2)),
    "Z2xZ4": lambda: direct_product(make_cyclic(2), make_cyclic(4)),
    "S3xZ2": lambda: direct_product(make_symmetric(3), make_cyclic(2)),
    "Z7:Z3": lambda: make_semidirect(make_cyclic(7), make_cyclic(3), cyclic_action(7, 3, 2)),
    "PSL7": lambda: make_psl2(7),
}
_CACHE: dict[str, GroupContext] = {}


def ctx_for(name: str) -> GroupContext:
    if name not in _CACHE:
        if name.startswith("Z") and name[1:].isdigit():
            _CACHE[name] = GroupContext(make_cyclic(int(name[1:])))
        else:
            _CACHE[name] = GroupContext(_BUILDERS[name]())
    return _CACHE[name]


@pytest.fixture
def ctx():
    return ctx_for


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n].line())
