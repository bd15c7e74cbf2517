"""Marcinkiewicz-space averages, logarithmic Cesaro means and trace diagnostics."""
