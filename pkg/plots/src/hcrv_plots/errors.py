class SchemaMismatch(Exception):
    """An input file is missing, empty, lacks the schema header, or lacks a
    column a figure kind requires; the message names the offender."""
