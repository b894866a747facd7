import pytest

from fpairs import constructions as C
from fpairs.lattice import LatticeError
from fpairs.planner import invariant_checks

# Every polytope any construction produces during the run is checked here,
# when it is made.  The acceptance suite reads the tally at the very end.
INVARIANTS = {"checked": 0, "failures": [], "seen": set()}
CRITERIA: dict = {}


def record_criterion(n: int, ok: bool, detail: str):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    CRITERIA[n] = line
    print(line)


def _observe(P):
    key = (P.dim, P.vertices)
    if key in INVARIANTS["seen"]:
        return
    INVARIANTS["seen"].add(key)
    INVARIANTS["checked"] += 1
    try:
        checks = invariant_checks(C.lattice_of(P))
    except LatticeError as e:
        INVARIANTS["failures"].append((P.dim, P.nvertices, f"lattice: {e}"))
        return
    bad = [k for k, ok in checks.items() if not ok]
    if bad:
        INVARIANTS["failures"].append((P.dim, P.nvertices, ", ".join(bad)))


def pytest_configure(config):
    C.add_observer(_observe)


def pytest_collection_modifyitems(session, config, items):
    # acceptance criteria run last so the invariant tally covers the whole run
    items.sort(key=lambda it: it.fspath.basename == "test_acceptance.py")


@pytest.fixture
def invariants():
    return INVARIANTS


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[n])
