import pytest

from hatewatch import corpus as corpus_mod
from hatewatch import linear, textnorm

_ACCEPTANCE_RESULTS = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        _ACCEPTANCE_RESULTS.append((marker.args[0], report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    """One explicit pass/fail line per acceptance criterion."""
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, duration in _ACCEPTANCE_RESULTS:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}  ({duration:.2f}s)")


@pytest.fixture(scope="session")
def lexicons():
    return textnorm.default_lexicons()


@pytest.fixture(scope="session")
def fast_hyper():
    return linear.LogRegHyper(max_iter=400, seed=0)


@pytest.fixture()
def toy_corpus():
    mk = corpus_mod.UnifiedRecord
    return [
        mk(0, "have a nice day", "neither", "en", "t"),
        mk(1, "you are a fucking idiot", "abusive", "en", "t"),
        mk(2, "these vermin invaders must go", "hate", "en", "t"),
        mk(3, "what a beautiful morning", "neither", "en", "t"),
        mk(4, "shut up you stupid loser", "abusive", "en", "t"),
        mk(5, "go back to your country", "hate", "en", "t"),
        mk(6, "आज मौसम अच्छा है", "neither", "hi", "t"),
        mk(7, "तू एकदम चूतिया है", "abusive", "hi", "t"),
        mk(8, "ये सब कटुए हैं", "hate", "hi", "t"),
        mk(9, "chai aur baarish ka mausam", "neither", "hi_codemix", "t"),
        mk(10, "saale harami teri aukat kya hai", "abusive", "hi_codemix", "t"),
        mk(11, "yeh sab gaddar hain inko nikalo", "hate", "hi_codemix", "t"),
    ]


def make_base_corpus(
    lexicons,
    n_hate: int = 10,
    n_abusive: int = 10,
    n_neither: int = 20,
    language: str = "en",
    start_id: int = 0,
) -> list:
    """A deterministic toy training corpus with lexically planted labels.

    Slightly neither-heavy so out-of-vocabulary inputs fall back to the
    majority class with modest confidence, as a real corpus would.
    """
    slurs = sorted(lexicons.slurs[language])
    profane = sorted(lexicons.profanity[language])
    neutral = sorted(lexicons.neutral[language])
    records = []
    rid = start_id
    for i in range(n_hate):
        records.append(
            corpus_mod.UnifiedRecord(
                rid, f"{slurs[i % len(slurs)]} {neutral[i % 7]} {neutral[(i + 3) % 11]}",
                "hate", language, "toy",
            )
        )
        rid += 1
    for i in range(n_abusive):
        records.append(
            corpus_mod.UnifiedRecord(
                rid, f"{profane[i % len(profane)]} {neutral[(i + 1) % 7]} {neutral[(i + 5) % 11]}",
                "abusive", language, "toy",
            )
        )
        rid += 1
    for i in range(n_neither):
        records.append(
            corpus_mod.UnifiedRecord(
                rid, f"{neutral[i % 13]} {neutral[(i + 2) % 17]} {neutral[(i + 4) % 19]}",
                "neither", language, "toy",
            )
        )
        rid += 1
    return records


def make_trilingual_corpus(lexicons) -> list:
    """Base corpus covering all three languages with dense ids."""
    records = make_base_corpus(lexicons, language="en")
    records += make_base_corpus(lexicons, language="hi", start_id=len(records))
    records += make_base_corpus(lexicons, language="hi_codemix", start_id=len(records))
    return records
