"""Tests for mpst-partial-checker"""
