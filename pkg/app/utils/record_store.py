import json
import logging
import os
from typing import Iterator, Optional, Set, Tuple

from pydantic import ValidationError

from app.models.census import CensusRecord
from app.utils.errors import RecordStoreCorruptError

logger = logging.getLogger(__name__)


class RecordStore:
    """Append-only line-delimited JSON file of census records, one writer per file"""

    def __init__(self, path: str):
        self.path = path

    def append(self, record: CensusRecord) -> None:
        directory = os.path.dirname(self.path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        line = json.dumps(record.model_dump(mode="json"), sort_keys=True)
        with open(self.path, "a", encoding="utf-8") as handle:
            handle.write(line + "\n")

    def scan(self) -> Iterator[CensusRecord]:
        if not os.path.exists(self.path):
            return
        with open(self.path, "r", encoding="utf-8") as handle:
            for line_number, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                if not line.endswith("\n"):
                    raise RecordStoreCorruptError(self.path, line_number, "truncated line")
                try:
                    yield CensusRecord.model_validate(json.loads(line))
                except (json.JSONDecodeError, ValidationError) as e:
                    raise RecordStoreCorruptError(self.path, line_number, str(e).splitlines()[0])

    def completed_keys(self, config_hash: Optional[str] = None) -> Set[Tuple[int, ...]]:
        """Resume keys of records already written for the given search"""
        keys = {
            record.resume_key
            for record in self.scan()
            if config_hash is None or record.config_hash == config_hash
        }
        logger.info(f"Found {len(keys)} completed records in {self.path}")
        return keys
