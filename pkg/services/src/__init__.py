# services/src/__init__.py
"""
Services module for the rci-secrecy project.
Main package containing the channel, precoder, rate, large-system, power
allocation and experiment components.
"""
