__version__ = "0.1.0"

from .base import Global, OrderonError
from .graph import OrderedGraph, WeightedOrderedGraph, PatternGraph, PropertySpec
from .grid import GridOrderon, StepKernel, build_grid_orderon, embed
