from .config import *
from .defaults import *
from .experiments import *
from .seeding import *
from .table import *
