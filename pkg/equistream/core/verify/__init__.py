from equistream.core.verify.suite import (
    BaseSuite,
    PropertyResult,
    SuiteReport,
    create_suite,
    run_suites,
)
