#!/usr/bin/env python3
# Copyright 2026 The dynsim Authors
# SPDX-License-Identifier: Apache-2.0
"""Hand-assembles the golden single-entry pose frame, field by field."""

import pathlib

out = bytearray()
out += (0x44565350).to_bytes(4, "little")  # magic
out += bytes([1])  # version
out += bytes([0x01])  # flags
out += (7).to_bytes(4, "little")  # seq
out += (1234567890123).to_bytes(8, "little")  # timestamp_us
out += (1).to_bytes(2, "little")  # count
out += (42).to_bytes(4, "little")  # object_id

# IEEE-754 binary64 patterns for 1.5, -2.25, 3.0, 0.5, written out by hand.
for bits in (0x3FF8000000000000, 0xC002000000000000, 0x4008000000000000,
             0x3FE0000000000000, 0x3FE0000000000000, 0x3FE0000000000000,
             0x3FE0000000000000):
    out += bits.to_bytes(8, "little")

assert len(out) == 20 + 60
pathlib.Path(__file__).with_name("pose_frame_golden.bin").write_bytes(bytes(out))
