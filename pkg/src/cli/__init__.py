"""Command-line modules"""
