"""Command-line entry point; subcommands live in each domain's ``commands`` module."""
