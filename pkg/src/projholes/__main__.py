from .harness_cli import entry

entry()
