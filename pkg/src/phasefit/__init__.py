"""Phase-fitted 10-step symmetric multistep methods for orbital problems."""
