import logging
import logging.handlers
import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

import numpy as np
from pythonjsonlogger import jsonlogger

from .config import settings

_LOGGING_CONFIGURED = False

# Configure logging
def setup_logging(debug: bool = None):
    """Configure logging for the workbench (idempotent)"""
    global _LOGGING_CONFIGURED
    if _LOGGING_CONFIGURED:
        return
    _LOGGING_CONFIGURED = True

    debug = settings.DEBUG if debug is None else debug
    level = logging.DEBUG if debug else logging.INFO

    # Root logger
    logger = logging.getLogger()
    logger.setLevel(level)

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    # Console handler
    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if settings.LOG_TO_FILE:
        log_dir = ensure_directory_exists(settings.LOG_DIR)
        file_formatter = (
            jsonlogger.JsonFormatter('%(asctime)s %(name)s %(levelname)s %(message)s')
            if settings.LOG_JSON else formatter
        )

        # File handler (rotating)
        file_handler = logging.handlers.RotatingFileHandler(
            log_dir / "workbench.log",
            maxBytes=10 * 1024 * 1024,  # 10MB
            backupCount=5,
            encoding="utf-8"
        )
        file_handler.setLevel(logging.DEBUG if debug else logging.INFO)
        file_handler.setFormatter(file_formatter)

        # Error file handler
        error_file_handler = logging.handlers.RotatingFileHandler(
            log_dir / "error.log",
            maxBytes=10 * 1024 * 1024,  # 10MB
            backupCount=5,
            encoding="utf-8"
        )
        error_file_handler.setLevel(logging.ERROR)
        error_file_handler.setFormatter(file_formatter)

        logger.addHandler(file_handler)
        logger.addHandler(error_file_handler)

    # Suppress noisy loggers
    for name in settings.QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)

def to_json_serializable(data: Any) -> Any:
    """Convert data (numpy included) to JSON serializable format"""
    if isinstance(data, dict):
        return {str(k): to_json_serializable(v) for k, v in data.items()}
    elif isinstance(data, (list, tuple)):
        return [to_json_serializable(item) for item in data]
    elif isinstance(data, np.ndarray):
        return to_json_serializable(data.tolist())
    elif isinstance(data, np.bool_):
        return bool(data)
    elif isinstance(data, np.integer):
        return int(data)
    elif isinstance(data, np.floating):
        return float(data)
    elif isinstance(data, (complex, np.complexfloating)):
        return {"real": float(data.real), "imag": float(data.imag)}
    elif isinstance(data, (str, int, float, bool, type(None))):
        return data
    elif isinstance(data, Path):
        return str(data)
    elif hasattr(data, 'dict'):  # pydantic models
        return to_json_serializable(data.dict())
    elif hasattr(data, '__dict__'):
        return to_json_serializable(data.__dict__)
    else:
        return str(data)

def write_json(path: Union[str, Path], data: Any) -> Path:
    """Write data as sorted, indented JSON"""
    path = Path(path)
    ensure_directory_exists(path.parent)
    with open(path, "w", encoding="utf-8") as fout:
        json.dump(to_json_serializable(data), fout, indent=2, sort_keys=True)
        fout.write("\n")
    return path

def read_json(path: Union[str, Path]) -> Any:
    with open(path, "r", encoding="utf-8") as fin:
        return json.load(fin)

def format_float(value: float) -> str:
    """Round-trip exact text for a float (repr is shortest exact)"""
    return repr(float(value))

def write_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write rows as CSV with floats in round-trip exact form"""
    path = Path(path)
    ensure_directory_exists(path.parent)
    with open(path, "w", encoding="utf-8", newline="") as fout:
        writer = csv.writer(fout, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path

def read_csv(path: Union[str, Path]) -> List[Dict[str, str]]:
    with open(path, "r", encoding="utf-8", newline="") as fin:
        return list(csv.DictReader(fin))

def ensure_directory_exists(directory: Union[str, Path]) -> Path:
    """Ensure directory exists, create if it doesn't"""
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    return path

def state_label(index: int) -> str:
    """Alphabetic ensemble label: 0 -> A, 25 -> Z, 26 -> AA"""
    label = ""
    index += 1
    while index > 0:
        index, rem = divmod(index - 1, 26)
        label = chr(ord("A") + rem) + label
    return label
