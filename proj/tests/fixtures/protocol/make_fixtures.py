"""Writes the wire-protocol fixtures with the Python stdlib only."""
import base64, json, struct, zlib
from pathlib import Path

HERE = Path(__file__).parent


def png(width, height, color_type, rows):
    def chunk(tag, data):
        return struct.pack(">I", len(data)) + tag + data + struct.pack(">I", zlib.crc32(tag + data))
    raw = b"".join(b"\x00" + bytes(r) for r in rows)
    ihdr = struct.pack(">IIBBBBB", width, height, 8, color_type, 0, 0, 0)
    return b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr) + chunk(b"IDAT", zlib.compress(raw)) + chunk(b"IEND", b"")


def b64(data):
    return base64.b64encode(data).decode()


def write(name, obj):
    (HERE / name).write_text(json.dumps(obj, indent=1) + "\n")


# 5x4 RGB crop: white with a dark 2x2 block at (1,1).
rgb = [[(20, 30, 40) if 1 <= x <= 2 and 1 <= y <= 2 else (250, 250, 250) for x in range(5)] for y in range(4)]
rgb_png = png(5, 4, 2, [[c for px in row for c in px] for row in rgb])
write("segment_request.json", {"image_b64": b64(rgb_png), "box": [0, 0, 4, 3],
                               "pos_points": [[1, 1]], "neg_points": [[3, 2]]})
write("image_request.json", {"image_b64": b64(rgb_png)})

logits = [[-1.5, 1.0, 2.25, -0.5], [-2.0, 0.125, 3.0, -1.0], [-3.0, -0.0, 0.5, -4.0]]
mask_rows = [[255 if v > 0 else 0 for v in row] for row in logits]
write("segment_response.json", {
    "mask_b64": b64(png(4, 3, 0, mask_rows)),
    "logits_b64": b64(b"".join(struct.pack("<f", v) for row in logits for v in row)),
    "shape": [3, 4], "score": 0.875})
write("detect_response.json", {"boxes": [[1, 2, 11, 20, 0.95], [12.0, 2, 20, 20, 0.5], [21, 3, 30, 19, 1]]})
write("recognize_response.json", {"text": "vi", "confidences": [0.75, 0.5]})
write("health_response.json", {"status": "ok", "models": {"segmenter": "sam-vit-b", "detector": "craft-synthtext"}})

# Malformed responses the client must refuse.
flipped = [[255 if (v > 0) != (x == 0 and y == 0) else 0 for x, v in enumerate(row)] for y, row in enumerate(logits)]
write("bad_mask_disagrees.json", {
    "mask_b64": b64(png(4, 3, 0, flipped)),
    "logits_b64": b64(b"".join(struct.pack("<f", v) for row in logits for v in row)),
    "shape": [3, 4], "score": 0.5})
write("bad_logits_short.json", {
    "mask_b64": b64(png(4, 3, 0, mask_rows)),
    "logits_b64": b64(b"".join(struct.pack("<f", v) for row in logits for v in row)[:-4]),
    "shape": [3, 4], "score": 0.5})
write("bad_base64.json", {"mask_b64": "@@@@", "logits_b64": "AAAA", "shape": [1, 1], "score": 0})
write("bad_confidence.json", {"boxes": [[0, 0, 4, 4, 1.5]]})
write("bad_recognize_length.json", {"text": "abc", "confidences": [0.5]})
write("bad_box_arity.json", {"boxes": [[0, 0, 4, 4]]})
