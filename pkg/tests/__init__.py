"""Tests package for treesieve."""
