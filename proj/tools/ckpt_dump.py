#!/usr/bin/env python3
"""Minimal independent reader for inferum checkpoint files.

Layout (little-endian): magic "INFR", uint32 version, uint64 metadata length,
UTF-8 JSON metadata, then float64 parameters to end of file.
"""
import json
import struct
import sys

with open(sys.argv[1], "rb") as f:
    data = f.read()
assert data[:4] == b"INFR", "not an INFR checkpoint"
version, meta_len = struct.unpack_from("<IQ", data, 4)
meta = json.loads(data[16 : 16 + meta_len])
theta = struct.unpack_from(f"<{(len(data) - 16 - meta_len) // 8}d", data, 16 + meta_len)
print(f"theta_count={len(theta)}")
print(f"version={version}")
print(f"arch={json.dumps(meta['arch'], sort_keys=True)}")
print(f"theta_head={[round(v, 6) for v in theta[:4]]}")
