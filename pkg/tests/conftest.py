"""Prints a one-line verdict per acceptance check after the run."""

import re

ACCEPTANCE = {
    1: "exact interleaving bounds pass for every n in 2..64, n=2 row golden, under 1 s",
    2: "witness coherent-information rate matches (j-1)(1-p)/j log2 d at desk scale",
    3: "erasure private/classical closed forms recovered by ensemble search",
    4: "switch private value 0.8 within 2e-2, attained flag-pinned",
    5: "locking bound value and entropy-minus-subentropy inequality",
    6: "sampled Holevo values never beat the additive classical bound",
    7: "Haar-measured entropy matches the analytic mean; constant documented",
    8: "gamma_2 and gamma_10000 values; limit discrepancy recorded",
    9: "verify all --seed 0 is byte-identical across runs",
}

_outcomes: dict[int, str] = {}
_pattern = re.compile(r"test_acceptance\.py::test_a(\d)_")


def pytest_runtest_logreport(report):
    m = _pattern.search(report.nodeid)
    if not m:
        return
    num = int(m.group(1))
    if report.when == "call":
        _outcomes[num] = report.outcome
    elif report.when == "setup" and report.outcome != "passed":
        _outcomes[num] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance checks")
    for num in sorted(ACCEPTANCE):
        outcome = _outcomes.get(num, "not run")
        verdict = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"acceptance {num} {verdict} - {ACCEPTANCE[num]}")
