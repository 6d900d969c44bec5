"""API modules"""

