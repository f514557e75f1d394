# Copyright 2026 The l2v Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes the bridge exchange fixture: one 4 s clip as the extraction bridge emits it.

Standard library only, so the fixture can be regenerated without the bridge's
model dependencies. Values are chosen to be exactly representable in 32 bits.

    python3 make_bridge_fixture.py [OUT_DIR]
"""

import json
import os
import struct
import sys

MAGIC = b"L2V1"
DTYPE_F32 = 0
VIDEO_RATE, AUDIO_RATE = 25, 50
SECONDS = 4
VIDEO_DIM, AUDIO_DIM, LOGIT_DIM = 8, 12, 32


def value(kind, t, d):
    # Small dyadic rationals: exact in float32 and distinct per (kind, t, d).
    return ((t * 31 + d * 7 + kind * 13) % 257 - 128) / 64.0


def write_latents(path, kind, rows, cols, rate):
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<4I", DTYPE_F32, rate, rows, cols))
        for t in range(rows):
            f.write(struct.pack("<%df" % cols, *(value(kind, t, d) for d in range(cols))))


def main(out):
    os.makedirs(os.path.join(out, "latents"), exist_ok=True)
    tv = VIDEO_RATE * SECONDS
    ta = AUDIO_RATE * SECONDS
    clip = "clip0001"
    write_latents(os.path.join(out, "latents", clip + ".video.l2v"), 0, tv, VIDEO_DIM, VIDEO_RATE)
    write_latents(os.path.join(out, "latents", clip + ".audio.l2v"), 1, ta, AUDIO_DIM, AUDIO_RATE)
    write_latents(os.path.join(out, "latents", clip + ".logits.l2v"), 2, ta, LOGIT_DIM, AUDIO_RATE)
    record = {
        "id": clip,
        "transcript": "the quick brown fox",
        "video": "latents/%s.video.l2v" % clip,
        "audio": "latents/%s.audio.l2v" % clip,
        "logits": "latents/%s.logits.l2v" % clip,
        "duration": float(SECONDS),
        "split": "test",
        "source": {"video_encoder": "bridge", "frames_trimmed": 1},
    }
    with open(os.path.join(out, "manifest.jsonl"), "w", encoding="utf-8") as f:
        f.write(json.dumps(record, sort_keys=True) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "bridge"))
