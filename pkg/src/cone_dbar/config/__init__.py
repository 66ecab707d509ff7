"""
Configuration module for the verification harness
"""

from .settings import (SystemConfig, GeometryConfig, GridConfig, NormConfig, HarnessConfig,
                       config, load_config, parse_config_text)

__all__ = ['SystemConfig', 'GeometryConfig', 'GridConfig', 'NormConfig', 'HarnessConfig',
           'config', 'load_config', 'parse_config_text']
