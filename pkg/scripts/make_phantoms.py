#!/usr/bin/env python3
"""Write the committed demo phantoms as raw volumes + sidecars.

Usage: python scripts/make_phantoms.py [out_dir]
"""

import json
import sys
from pathlib import Path

from voxray import generate_phantom, save_raw
from voxray.phantoms import (
    bench_phantom_spec,
    latency_phantom_spec,
    speckle_phantom_spec,
    spot_phantom_spec,
)


def main():
    out_dir = Path(sys.argv[1] if len(sys.argv) > 1 else "phantoms")
    out_dir.mkdir(parents=True, exist_ok=True)
    specs = {
        "spot_128": spot_phantom_spec(),
        "speckle_128": speckle_phantom_spec(),
        "latency_128": latency_phantom_spec(),
        "bench_256": bench_phantom_spec(),
    }
    for name, spec in specs.items():
        print(f"generating {name} ...", flush=True)
        volume = generate_phantom(spec)
        save_raw(volume, out_dir / f"{name}.raw", source=name)
        (out_dir / f"{name}.spec.json").write_text(
            json.dumps(spec.to_json(), indent=2) + "\n"
        )
        print(f"  {volume.content_hash()}  {out_dir / (name + '.raw')}")


if __name__ == "__main__":
    main()
