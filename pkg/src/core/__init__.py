"""
Core functionality: settings, errors, dense matrices and report models.
"""
