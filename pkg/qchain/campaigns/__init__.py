"""Shipped campaign configurations."""
