"""One package per pipeline stage; each may expose a ``commands`` module for the CLI."""
