import json

from fastapi import HTTPException, status
from typing import Any, Dict, List, Tuple

from app.config import settings
from app.models.polynomial import ExponentMatrix
from app.utils.errors import InvalidArgumentError, SparseMahlerError


def parse_int_list(text: str) -> List[int]:
    """'50,100,200' -> [50, 100, 200]"""
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidArgumentError(f"expected comma-separated integers, got {text!r}")


def parse_shard(text: str) -> Tuple[int, int]:
    """'i/c' -> (i, c) with 0 <= i < c"""
    try:
        index, count = (int(part) for part in text.split("/"))
    except ValueError:
        raise InvalidArgumentError(f"shard must look like i/c, got {text!r}")
    if count < 1 or not 0 <= index < count:
        raise InvalidArgumentError(f"shard index {index} is outside 0..{count - 1}")
    return index, count


def parse_matrix(text: str) -> ExponentMatrix:
    """'1,0;0,2' -> rows (1, 0) and (0, 2)"""
    rows = tuple(tuple(parse_int_list(row)) for row in text.split(";") if row.strip())
    try:
        return ExponentMatrix(rows=rows)
    except ValueError as e:
        raise InvalidArgumentError(f"invalid matrix {text!r}: {e}")


def with_schema(payload: Dict[str, Any]) -> Dict[str, Any]:
    return {"schema": settings.SCHEMA_VERSION, **payload}


def dump_json(payload: Dict[str, Any]) -> str:
    """Stable rendering: sorted keys, repr floats"""
    return json.dumps(with_schema(payload), sort_keys=True, ensure_ascii=False)


def domain_http_error(error: SparseMahlerError) -> HTTPException:
    """422 carrying the stable error code"""
    return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=error.to_dict())
