import warnings

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def pytest_configure(config):
    warnings.filterwarnings("ignore", message=".*outside the regime.*")


def pytest_terminal_summary(terminalreporter):
    import sys
    lines = [ln for mod in list(sys.modules.values()) for ln in getattr(mod, "ACCEPTANCE_LINES", [])]
    if lines:
        terminalreporter.section("acceptance criteria")
        for ln in lines:
            terminalreporter.write_line(ln)
