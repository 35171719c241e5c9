pytest_plugins = [
    "tests.fixtures.context",
    "tests.fixtures.phantom",
    "tests.fixtures.bank",
]
