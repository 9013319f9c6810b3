"""Small helpers shared by the CLI and the suite runner."""
