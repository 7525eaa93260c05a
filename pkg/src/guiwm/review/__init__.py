"""Web review of duplicate clusters.

`create_app` builds a FastAPI app over a clusters file and an append-only
decisions log.  The JSON API is the entire contract; the bundled page and
the separate frontend build are both thin clients of it, so decisions
recorded through the browser and through ``bench decide`` are
indistinguishable downstream.
"""

from .server import create_app

__all__ = ["create_app"]
