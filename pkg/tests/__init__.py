"""Tests for hardcore-lab."""
