import pytest

from confined_nlcs import derive_params

TABLE_A = (0.5, 1.0, 2.0, 3.0, 4.0)


@pytest.fixture(params=TABLE_A, ids=lambda a: f"a={a}")
def table_params(request):
    return derive_params(request.param)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
