"""Tests for Agency Toolkit."""
