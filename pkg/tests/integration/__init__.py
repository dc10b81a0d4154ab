"""Desk-scale simulation runs, skipped unless GSQG_SLOW_TESTS=1"""
