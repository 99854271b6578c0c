"""
Test suites for the instanton mass toolkit
"""
