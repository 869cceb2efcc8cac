"""Prints a one-line verdict per acceptance criterion after the run."""

import re

CRITERION_TITLES = {
    1: "oracle MASE follows a power law in vocabulary size (r^2 >= 0.98)",
    2: "the three fitted slopes agree pairwise within 0.15",
    3: "utilization rank-correlates with the bound at each vocabulary size",
    4: "Spearman p-value convention (n=3: rho 0.5 -> p 0.667, |rho| 1 -> p 0)",
    5: "no token sequence beats the oracle (brute force)",
    6: "quantizer round-trip properties, 10,000 random (layout, value) pairs",
    7: "scaling scheme contracts, 1,000 random contexts",
    8: "MASE fixtures exact and scale-invariant to 1e-12",
    9: "Cramer's V endpoints 0, 1, 0.5 exact",
    10: "tuned width beats half and double width",
    11: "CLI files byte-identical across thread counts",
}

_NODE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = {}
    for outcome, verdict in (("passed", "PASS"), ("failed", "FAIL"),
                             ("error", "FAIL"), ("skipped", "SKIP")):
        for rep in terminalreporter.stats.get(outcome, []):
            match = _NODE.search(getattr(rep, "nodeid", ""))
            if not match:
                continue
            num = int(match.group(1))
            detail = "; ".join(str(v) for k, v in
                               getattr(rep, "user_properties", ())
                               if k == "detail")
            # a later teardown PASS must not mask a call FAIL
            if num not in results or verdict != "PASS":
                results[num] = (verdict, detail)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        verdict, detail = results[num]
        line = f"criterion {num:2d}: {verdict} - {CRITERION_TITLES.get(num, '')}"
        if detail:
            line += f" [{detail}]"
        terminalreporter.write_line(line)
