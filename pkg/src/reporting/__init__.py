"""
Report rendering: hand-emitted SVG charts.
"""
