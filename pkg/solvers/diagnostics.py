"""
Diagnostics Store
In-memory record of solver runs: parameters, residual norms, truncation levels and decay fits.
"""

import json
import logging
from typing import Dict, Optional

import numpy as np

logger = logging.getLogger(__name__)


def to_plain(value):
    """Nested numpy and complex values as JSON-serializable Python objects"""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, complex):
        return {'re': value.real, 'im': value.imag}
    return value


class DiagnosticsStore:
    def __init__(self):
        """Initialize an empty run store"""
        # Structure: {run_id: {problem: str, params: {}, records: {}, status: str, error: str | None}}
        self.runs: Dict[str, Dict] = {}
        logger.debug("Diagnostics store initialized (in-memory)")

    def create_run(self, run_id: str, problem: str, params: Optional[Dict] = None) -> bool:
        """Create a run entry; returns False when the id is taken"""
        if run_id in self.runs:
            return False
        self.runs[run_id] = {
            'problem': problem,
            'params': to_plain(params or {}),
            'records': {},
            'status': 'running',
            'error': None,
        }
        logger.info(f"Created diagnostics entry {run_id} ({problem})")
        return True

    def add_records(self, run_id: str, records: Dict) -> bool:
        if run_id not in self.runs:
            logger.error(f"No diagnostics entry {run_id}")
            return False
        self.runs[run_id]['records'].update(to_plain(records))
        return True

    def add_record(self, run_id: str, key: str, value) -> bool:
        return self.add_records(run_id, {key: value})

    def finish_run(self, run_id: str, error: Optional[Exception] = None) -> bool:
        """Mark a run as done, or failed with the error's category"""
        if run_id not in self.runs:
            return False
        entry = self.runs[run_id]
        if error is None:
            entry['status'] = 'ok'
        else:
            entry['status'] = getattr(error, 'category', 'internal')
            entry['error'] = str(error)
            logger.warning(f"Run {run_id} failed: {error}")
        return True

    def get_run(self, run_id: str) -> Optional[Dict]:
        return self.runs.get(run_id)

    def export_data(self, run_id: Optional[str] = None) -> str:
        """All runs, or a single run, as a JSON string"""
        data = self.runs if run_id is None else self.runs.get(run_id, {})
        return json.dumps(data, indent=2)
