import pytest

from rebalance.lexicon import StopwordSet, SynonymLexicon

# worked augmentation examples: (original, augmented, op)
WORKED_EXAMPLES = [
    ("Đcm nản vl", "Đcm nhụt chí vl", "SR"),
    ("Đm Lắm chuyện vl", "Đm thứ Lắm chuyện vl", "RI"),
    ("Đume đau răng vl", "Đume răng đau vl", "RS"),
    ("con này xấu trai vl", "con xấu trai vl", "RD"),
]
WORKED_EXAMPLES_SEED = 1199


@pytest.fixture
def worked_lexicon():
    return SynonymLexicon.from_groups([["nản", "nhụt chí"], ["chuyện", "thứ"]])


@pytest.fixture
def no_stopwords():
    return StopwordSet()


# acceptance criteria push (number, passed, detail) here; printed after the run
ACCEPTANCE_RESULTS: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}")
