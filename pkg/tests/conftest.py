import numpy as np
import pytest

from homoglab import FieldModel, instantiate


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def stripe_table(monkeypatch):
    """Install a fixed stripe weight table ``{slab index: weight}`` (default 2.0)."""

    def install(table, default=2.0):
        import homoglab.fields as fields
        import homoglab.oracle as oracle

        def fake(seed, index, lo=1.0, hi=2.0):
            idx = np.asarray(index, dtype=np.int64)
            return np.vectorize(lambda i: table.get(int(i), default), otypes=[float])(idx)

        monkeypatch.setattr(fields, "stripe_weights", fake)
        monkeypatch.setattr(oracle, "stripe_weights", fake)
        return instantiate(FieldModel.stripe(), 0)

    return install


# acceptance criteria report: one PASS/FAIL line per criterion

_CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    def record(number: int, passed: bool, detail: str) -> bool:
        _CRITERIA[number] = (bool(passed), detail)
        print(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
