"""
Loading of the flat JSON settings file shared by the command-line subcommands.
"""

import json
import logging
from pathlib import Path
from typing import Any, Mapping

from pydantic import ValidationError

from rfw2s.exceptions import InvalidParameter, ReportIOError
from rfw2s.schemas import RunSettings

logger = logging.getLogger(__name__)


def load_settings(path: Path | str | None = None, overrides: Mapping[str, Any] | None = None) -> RunSettings:
    """
    Builds validated settings from an optional JSON file and flag overrides.

    Overrides win over the file; overrides whose value is None are ignored so unset flags
    never mask file values.

    Args:
        path (Path | str | None): JSON file holding a single flat object, or None for defaults.
        overrides (Mapping[str, Any] | None): Values taken from command-line flags.

    Returns:
        RunSettings: The validated settings.

    Raises:
        ReportIOError: If the file cannot be read.
        InvalidParameter: If the file is not a JSON object, has unknown keys or holds
            out-of-range values.
    """
    data: dict[str, Any] = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise ReportIOError(f"cannot read settings from {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise InvalidParameter(f"{path} is not valid JSON: {e}") from e
        if not isinstance(raw, dict):
            raise InvalidParameter(f"{path} must contain a single JSON object")
        data.update(raw)
        logger.debug("Loaded %s settings from %s", len(raw), path)

    applied = {key: value for key, value in (overrides or {}).items() if value is not None}
    data.update(applied)
    if applied:
        logger.debug("Flag overrides: %s", sorted(applied))

    try:
        return RunSettings.model_validate(data)
    except ValidationError as e:
        raise InvalidParameter(str(e)) from e
