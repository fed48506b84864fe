"""figgen: publication-style figures from molresp CSV artifacts."""

__version__ = "0.1.0"

from .render import FigureSpec, RenderRecord, render  # noqa: F401
from .schema import SchemaError, read_csv  # noqa: F401
