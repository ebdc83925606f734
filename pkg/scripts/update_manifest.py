"""Regenerate the asset manifest (row counts + sha256) after editing data files."""

import csv
import hashlib
import json
from pathlib import Path

ASSETS = Path(__file__).resolve().parents[1] / "src" / "polyflam" / "assets"

SOURCES = {
    "table1.csv": "flammability-index dataset: thermophysical inputs, FI and class label for 32 polymers",
    "table2.csv": "cone-calorimetry dataset at 50 kW/m2: TIG, pHRR, TSR, FIGRA for 15 polymers",
    "expert_labels.csv": "expert flammability class assignments used to train the outlier-filter classifier (5 per class)",
    "repeat_units.csv": "curated repeat-unit SMILES; weights checked against the FI table where available",
    "chem1.json": "CHEM-1 descriptor catalog manifest (ordered names and definitions)",
}


def row_count(path: Path) -> int:
    if path.suffix == ".json":
        return len(json.loads(path.read_text())["entries"])
    with path.open(newline="", encoding="utf-8") as f:
        return max(0, sum(1 for _ in csv.reader(f)) - 1)


def main() -> None:
    files = []
    for name, source in SOURCES.items():
        path = ASSETS / name
        files.append(
            {
                "name": name,
                "source": source,
                "rows": row_count(path),
                "sha256": hashlib.sha256(path.read_bytes()).hexdigest(),
            }
        )
    manifest = ASSETS / "manifest.json"
    manifest.write_text(json.dumps({"files": files}, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {manifest} ({len(files)} files)")


if __name__ == "__main__":
    main()
