"""Built-in measurement models."""

from .lti import LTIModel
from .matcomp import MatCompModel
from .superres import SuperresModel

__all__ = ["SuperresModel", "LTIModel", "MatCompModel"]
