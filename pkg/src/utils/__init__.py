"""
Shared utilities: logging setup, numerics and output serialization
"""
