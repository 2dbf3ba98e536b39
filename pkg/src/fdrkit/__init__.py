"""Demographic fairness evaluation for biometric verification scores."""
