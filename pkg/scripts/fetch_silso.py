#!/usr/bin/env python3
"""Download the official sunspot-number records from SIDC/SILSO.

The bundled files under data/ are synthetic stand-ins (see
data/README.md).  Run this script on a machine with network access to
replace them with the real observatory records, then re-run the suite:

    python3 scripts/fetch_silso.py --dest data/
    solarfis suite configs/

Benchmark numbers in the bundled config footers were measured against
the synthetic files and will shift on the real records.
"""

import argparse
import sys
import urllib.request
from pathlib import Path

SOURCES = {
    # yearly mean total sunspot number, semicolon-delimited
    "ssn_yearly.dat": "https://www.sidc.be/SILSO/DATA/SN_y_tot_V2.0.txt",
    # monthly mean total sunspot number, semicolon-delimited
    "ssn_monthly.dat": "https://www.sidc.be/SILSO/DATA/SN_m_tot_V2.0.txt",
}


def fetch(url: str, dest: Path, timeout: float) -> None:
    print(f"fetching {url}")
    with urllib.request.urlopen(url, timeout=timeout) as response:
        payload = response.read()
    dest.write_bytes(payload)
    print(f"  wrote {dest} ({len(payload)} bytes)")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dest", default="data", help="directory to write into (default: data)")
    parser.add_argument("--timeout", type=float, default=60.0, help="per-request timeout seconds")
    args = parser.parse_args(argv)
    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    failures = 0
    for name, url in SOURCES.items():
        try:
            fetch(url, dest / name, args.timeout)
        except OSError as exc:
            print(f"  failed: {exc}", file=sys.stderr)
            failures += 1
    if failures:
        print(f"{failures} download(s) failed", file=sys.stderr)
        return 1
    print("done; validate with: solarfis ingest data/ssn_yearly.dat --cadence yearly")
    return 0


if __name__ == "__main__":
    sys.exit(main())
