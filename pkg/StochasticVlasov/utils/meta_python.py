# Copyright 2020-     Robot Framework Foundation
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
from enum import Enum
from typing import Any, Dict, List, Sequence, TypeVar

import numpy as np


def to_plain(value: Any) -> Any:
    """Convert enums, numpy scalars and arrays into JSON friendly Python values."""
    if isinstance(value, Enum):
        return value.name
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {str(key): to_plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(item) for item in value]
    return value


T = TypeVar("T")


def find_by_name(name: str, item_list: Sequence[Dict[str, T]], log_error=True) -> Dict[str, T]:
    """First dict in ``item_list`` whose ``name`` field equals ``name``."""
    from ..utils import logger

    def filter_fn(item):
        return item["name"] == name

    try:
        filtered = filter(filter_fn, item_list)
        return next(filtered)
    except StopIteration:
        if log_error:
            existing: List = [item["name"] for item in item_list]
            logger.error(f"No item named {name}. Existing names: {existing}")
        raise
