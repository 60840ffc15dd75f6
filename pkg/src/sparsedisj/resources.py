from dataclasses import fields, is_dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, List
import json

import numpy as np

SCHEMA_VERSION = 1

def to_jsonable(value: Any) -> Any:
    """
    Recursively translate a value into something json.dumps() accepts.
    Fractions become "p/q" strings so exact values survive the round trip,
    enums their value, numpy scalars/arrays plain python values.
    """
    if isinstance(value, ResourceBase):
        return value.to_base()
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, 'to_base'):
        return value.to_base()
    return value

def dumps(value: Any) -> str:
    """Canonical JSON text: sorted keys, 2-space indent, trailing newline."""
    return json.dumps(to_jsonable(value), sort_keys=True, indent=2) + "\n"

def _kept(v: Any) -> bool:
    """0 and False are real values, empty strings and containers are not"""
    return v is not None and (type(v) in (int, bool, float) or bool(v))

class ResourceBase():
    """
    Base for the dataclasses that end up in reports and transcripts, so that
    serialisation lives in one place.  Not a dataclass itself.
    """
    def to_base(self) -> dict:
        """
        Field by field JSON-ready dict.  Subclasses with a different report
        shape override this.  fixup() runs first so every field is normalised.
        """
        self.fixup()
        if not is_dataclass(self):
            return {}
        return {f.name: to_jsonable(getattr(self, f.name)) for f in fields(self)}

    def trim(self) -> dict:
        """to_base() without the top level fields that are None or empty"""
        return {k: v for k, v in self.to_base().items() if _kept(v)}

    def fixup(self) -> None:
        """
        hook for subclasses to coerce field types
        """
        pass

    def update_fields(self, **kwargs) -> List[str]:
        """
        Set the given fields, skipping None values and names that are not
        fields.  Returns the names that were set.
        """
        if not is_dataclass(self):
            return []
        names = {f.name for f in fields(self)}
        updated = [k for k, v in kwargs.items() if k in names and v is not None]
        for k in updated:
            setattr(self, k, kwargs[k])
        self.fixup()
        return updated

    def to_json(self) -> str:
        return dumps(self)
