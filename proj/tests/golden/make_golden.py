# Copyright 2026 The sgzsl Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes hello.bin with Python's json module, independent of the C++ codec.

Run once; the output is checked in and the C++ tests compare against it.
"""

import json
import pathlib
import struct

message = {
    "v": 1,
    "type": "Hello",
    "session": "s1",
    "seq": 0,
    "payload": {
        "protocol": "whitebox",
        "feature_dim": 32,
        "num_classes": 13,
        "alpha": 0.5,
        "budget": None,
        "classes": [],
    },
}

body = json.dumps(message, separators=(",", ":"), ensure_ascii=False).encode()
out = pathlib.Path(__file__).with_name("hello.bin")
out.write_bytes(struct.pack(">I", len(body)) + body)
print(f"{out}: {4 + len(body)} bytes")
