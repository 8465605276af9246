def import_extensions():
    import equistream_extension.suites
    import equistream_extension.variants
