import pytest

from meterread import preproc, reading, synth

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def trained():
    """(TemplateSet, FragmentTemplates) from the built-in glyphs, four samples per digit."""
    return synth.synthetic_templates()


@pytest.fixture(scope="session")
def templates(trained):
    return trained[0]


@pytest.fixture(scope="session")
def fragments(trained):
    return trained[1]


@pytest.fixture(scope="session")
def make_recognizer(trained):
    def make(cells=5, **kw):
        spec = synth.SynthSpec(reading=(synth.Full(0),) * cells)
        geometry = preproc.MeterGeometry(synth.window_rect(spec), cells)
        return reading.Recognizer(trained[0], trained[1], geometry, **kw)

    return make


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
