"""Test suite for CPML."""
