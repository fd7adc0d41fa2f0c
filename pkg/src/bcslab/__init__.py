"""Binary constraint systems and their operator solutions."""

__version__ = "0.1.0"
