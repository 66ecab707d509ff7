"""
Utility modules
"""

from .logger import setup_logging
from .report_generator import ReportGenerator
from .console_formatter import ConsoleFormatter
from .snapshot import save_snapshot, load_snapshot

__all__ = ['setup_logging', 'ReportGenerator', 'ConsoleFormatter', 'save_snapshot', 'load_snapshot']
