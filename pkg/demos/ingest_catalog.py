"""Turn the bundled miniature catalog into a two-plate daily count series.

    python3 demos/ingest_catalog.py
"""
import json
from importlib.resources import files

from minar.catalog import BinningSpec, bin_counts, load_regions, parse_catalog

data = files("minar") / "data"
cfg = json.loads((data / "mini_config.json").read_text())

parsed = parse_catalog(str(data / "mini_catalog.csv"))
print(f"{len(parsed.events)} events kept, {len(parsed.rejects)} rejected")
print(parsed.rejects_report())

regions = load_regions(str(data / "mini_plates.json"))
spec = BinningSpec(cfg["window_hours"], cfg["start"], cfg["end"], mag_lo=cfg["mag_lo"])
print(bin_counts(parsed.events, regions, spec, cfg["plates"]).to_csv())
