"""Tests for the pubench package."""
