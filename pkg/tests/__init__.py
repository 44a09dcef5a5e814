"""Tests for the churn pipeline."""
