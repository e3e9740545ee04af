import pytest


@pytest.fixture
def report(capsys):
    """Print a result line straight to the terminal, bypassing capture."""

    def emit(line: str) -> None:
        with capsys.disabled():
            print(line)

    return emit
