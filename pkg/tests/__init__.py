"""
SampleNet Toolkit test suite
"""
