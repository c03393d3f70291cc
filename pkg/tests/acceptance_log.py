"""Per-criterion PASS/FAIL lines collected by the acceptance tests."""
RESULTS: dict[int, str] = {}
