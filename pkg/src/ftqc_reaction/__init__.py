"""Reaction-time and resource models for surface-code fault-tolerant architectures."""
