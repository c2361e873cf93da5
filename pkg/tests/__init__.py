"""multiquant tests."""
