import numpy as np
import pytest

from zollsim.geometry import RevolutionProfile, ZollSurface


@pytest.fixture
def sphere():
    return ZollSurface.canonical()


@pytest.fixture
def tannery():
    return ZollSurface.tannery(RevolutionProfile.cubic(0.3))


@pytest.fixture
def tannery_quintic():
    return ZollSurface.tannery([0.2, -0.1, -0.1])


@pytest.fixture(params=["sphere", "cubic", "quintic"])
def any_surface(request):
    return {
        "sphere": ZollSurface.canonical(),
        "cubic": ZollSurface.tannery(RevolutionProfile.cubic(0.3)),
        "quintic": ZollSurface.tannery([0.2, -0.1, -0.1]),
    }[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


# acceptance criteria report ---------------------------------------------------

_CRITERIA: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): numbered acceptance criterion")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    number, title = mark.args
    detail = ""
    if call.excinfo is not None:
        detail = str(call.excinfo.value).splitlines()[0][:160] if str(call.excinfo.value) else ""
    _CRITERIA[number] = (title, "FAIL" if call.excinfo else "PASS", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, flag, detail = _CRITERIA[n]
        line = f"{flag}  criterion {n:2d}: {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
