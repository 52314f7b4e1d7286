"""Exact verification engine for tetrahedron / Yang-Baxter identities on Laurent-polynomial spaces."""

__version__ = "0.1.0"
