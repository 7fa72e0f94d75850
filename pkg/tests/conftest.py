import pytest

from helpers import graph

# Per-criterion outcome for the acceptance summary; a criterion fails if any
# of its tests fails and is skipped only if all of its tests were skipped.
_criteria: dict[int, list[str]] = {}


@pytest.fixture(params=["K2", "P3", "K3", "C4", "diamond", "K4", "star"])
def named_graph(request):
    return request.param, graph(request.param)


@pytest.fixture
def diamond():
    return graph("diamond")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    k = int(mark.args[0])
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _criteria.setdefault(k, []).append("skipped" if rep.skipped else rep.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_criteria):
        results = _criteria[k]
        if any(r == "failed" for r in results):
            verdict = "FAIL"
        elif all(r == "skipped" for r in results):
            verdict = "SKIP"
        else:
            verdict = "PASS"
        counts = ", ".join(f"{results.count(o)} {o}" for o in ("passed", "failed", "skipped")
                           if o in results)
        terminalreporter.write_line(f"criterion {k:2d}: {verdict}  ({counts})")
