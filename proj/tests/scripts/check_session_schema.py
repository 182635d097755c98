import json
import pathlib
import sys

import jsonschema

schema = json.loads(pathlib.Path(sys.argv[1]).read_text())
logs = sorted(pathlib.Path(sys.argv[2]).glob("*.json"))
if not logs:
    sys.exit("no session logs found")
for path in logs:
    jsonschema.validate(json.loads(path.read_text()), schema)
print(f"{len(logs)} session logs match the schema")
