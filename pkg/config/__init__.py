"""Configuration module for the LULC toolkit."""
from config.settings import *
from config.workspace import artifacts

__all__ = ['artifacts', 'settings', 'workspace']
