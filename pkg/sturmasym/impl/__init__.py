"""Default implementations behind the public API (study runner, results files)."""
