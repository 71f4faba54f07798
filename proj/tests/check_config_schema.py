# Copyright 2026 The tabreg Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Checks the published config schema against the CLI's default config."""

import json
import subprocess
import sys

import jsonschema


def main() -> int:
    cli, schema_path = sys.argv[1], sys.argv[2]
    with open(schema_path, encoding="utf-8") as f:
        schema = json.load(f)
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    config = json.loads(subprocess.run([cli, "config"], check=True, capture_output=True, text=True).stdout)
    validator.validate(config)
    bad = json.loads(json.dumps(config))
    bad["select"]["methods"].append("astrology")
    if validator.is_valid(bad):
        print("schema accepted an unknown selector")
        return 1
    bad = json.loads(json.dumps(config))
    bad["models"][1]["params"]["depth"] = 3
    if validator.is_valid(bad):
        print("schema accepted an unknown model parameter")
        return 1
    print("default config matches the schema")
    return 0


if __name__ == "__main__":
    sys.exit(main())
