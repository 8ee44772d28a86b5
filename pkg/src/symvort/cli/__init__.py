"""Command-line harness: ``symvort run|preset|validate``."""
