"""Command handlers for the multiquad launcher."""
