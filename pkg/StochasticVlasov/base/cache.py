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
import threading
from typing import Any, Callable, Dict, Hashable


class SpecCache:
    """Built kernels and noise specs keyed by their construction arguments.

    Blob specs need one adaptive quadrature per lattice shell, so keywords
    reuse them instead of rebuilding.
    """

    def __init__(self):
        self.cache: Dict[Hashable, Any] = {}
        self._lock = threading.Lock()

    def add(self, key: Hashable, item: Any):
        with self._lock:
            self.cache[key] = item

    def remove(self, key: Hashable):
        with self._lock:
            self.cache.pop(key, None)

    def get(self, key: Hashable):
        return self.cache.get(key, None)

    def get_or_create(self, key: Hashable, factory: Callable[[], Any]):
        item = self.get(key)
        if item is None:
            item = factory()
            self.add(key, item)
        return item

    def clear(self):
        with self._lock:
            self.cache.clear()

    def __len__(self) -> int:
        return len(self.cache)
