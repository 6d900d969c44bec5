"""Configuration modules"""

