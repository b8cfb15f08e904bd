def pytest_configure(config):
    config.addinivalue_line(
        "markers", "lte_u_length: full-size LTE-U packet-length search (slow)"
    )
