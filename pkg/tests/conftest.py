import pytest

from neumann_cert import certify


@pytest.fixture(scope="session")
def zone_runs():
    """Reference-constant sweeps of all zones, with grid values, computed once per session."""
    out = {}
    for z in certify.zones():
        rep, values = certify.sweep(z, lip_source="reference", workers=1, return_values=True)
        out[z.name] = (rep, values)
    return out


@pytest.fixture(scope="session")
def lipschitz_reports():
    return {z.name: certify.lipschitz_bounds(z) for z in certify.zones()}


@pytest.fixture(scope="session")
def fd_audits():
    return {z.name: certify.finite_difference_audit(z, n=10_000, h=1e-7, seed=0) for z in certify.zones()}


def pytest_terminal_summary(terminalreporter):
    lines = []
    for reports in terminalreporter.stats.values():
        for rep in reports:
            for key, val in getattr(rep, "user_properties", []):
                if key == "criterion":
                    lines.append(val)
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, text in sorted(set(lines)):
            terminalreporter.write_line(text)
