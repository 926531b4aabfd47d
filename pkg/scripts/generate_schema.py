#!/usr/bin/env python3
"""Generate JSON schemas for vc-gap-lab input files and the run report envelope."""

import json
import sys
from pathlib import Path

# Add src to path for imports
src_path = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_path))

from pydantic import BaseModel  # noqa: E402

from vc_gap_lab.models import GraphFile, MetricFile, RunReport  # noqa: E402

SCHEMAS: dict[str, tuple[type[BaseModel], str]] = {
    "graph.schema.json": (GraphFile, "Graph input file: vertex count and edge list"),
    "metric.schema.json": (MetricFile, "Finite metric input file: symmetric distance matrix"),
    "report.schema.json": (RunReport, "Envelope written by every vc-gap-lab command"),
}


def main() -> None:
    """Write one schema file per model into schemas/."""
    output_dir = Path(__file__).parent.parent / "schemas"
    output_dir.mkdir(parents=True, exist_ok=True)

    for filename, (model, description) in SCHEMAS.items():
        schema = model.model_json_schema()
        schema["$schema"] = "http://json-schema.org/draft-07/schema#"
        schema["description"] = description

        output_path = output_dir / filename
        with output_path.open("w") as f:
            json.dump(schema, f, indent=2)
        print(f"Schema generated: {output_path}")


if __name__ == "__main__":
    main()
