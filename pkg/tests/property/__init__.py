"""Property-based tests for realizations, policies and the instance family."""
