"""
Deterministic CSV and JSON report writing
"""

import glob
import json
import os
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from ..config.settings import config

FLOAT_FORMAT = "%.12e"


def _plain(value: Any) -> Any:
    """Convert numpy scalars and containers into JSON-native values"""
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_plain(item) for item in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if np.isnan(value) or np.isinf(value):
            return None
        return value
    return value


class ReportGenerator:
    """Writes row tables and summaries under the output directory"""

    def __init__(self, out_dir: str = None):
        if out_dir is None:
            out_dir = config.harness.out_dir
        self.out_dir = out_dir
        os.makedirs(self.out_dir, exist_ok=True)

    def save_rows_csv(self, rows: pd.DataFrame, name: str) -> str:
        """<name>_rows.csv with a header row and a fixed float format"""
        filepath = os.path.join(self.out_dir, f"{name}_rows.csv")
        rows.to_csv(filepath, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        return filepath

    def save_summary_json(self, summary: Dict[str, Any], name: str) -> str:
        """<name>_summary.json with sorted keys and no timestamps"""
        filepath = os.path.join(self.out_dir, f"{name}_summary.json")
        with open(filepath, 'w', encoding='utf-8') as f:
            json.dump(_plain(summary), f, indent=2, sort_keys=True, ensure_ascii=False)
            f.write('\n')
        return filepath

    def collect_summaries(self) -> List[Dict[str, Any]]:
        """Every *_summary.json in the output directory, in file-name order"""
        summaries = []
        for filepath in sorted(glob.glob(os.path.join(self.out_dir, "*_summary.json"))):
            with open(filepath, 'r', encoding='utf-8') as f:
                data = json.load(f)
            data['summary_file'] = os.path.basename(filepath)
            summaries.append(data)
        return summaries

    def save_report(self, summaries: List[Dict[str, Any]]) -> str:
        """report.json aggregating the collected summaries"""
        passed = [bool(s.get('passed', s.get('stable', False))) for s in summaries]
        data = {
            'total': len(summaries),
            'passed': sum(passed),
            'all_passed': bool(summaries) and all(passed),
            'summaries': summaries,
        }
        filepath = os.path.join(self.out_dir, "report.json")
        with open(filepath, 'w', encoding='utf-8') as f:
            json.dump(_plain(data), f, indent=2, sort_keys=True, ensure_ascii=False)
            f.write('\n')
        return filepath
