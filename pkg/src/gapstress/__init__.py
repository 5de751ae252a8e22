__version__ = "0.1.0"
__author__ = "gapstress developers"
__license__ = "MIT"
