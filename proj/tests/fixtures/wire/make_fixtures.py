"""Wire-protocol fixtures.

Writes the golden *responses* with Pillow (an encoder independent of the C++
codec) and, when the golden *requests* exist, checks them structurally and
decodes their embedded PNGs against the same pixel formulas the C++ tests use.

    python3 tests/fixtures/wire/make_fixtures.py
"""

import base64
import io
import json
import pathlib
import sys

from PIL import Image

HERE = pathlib.Path(__file__).resolve().parent


def chat_rgb(x, y):
    return (x * 60, y * 100, (x + y) * 30)


def seg_rgb(x, y):
    return (x * 25, y * 25, 128)


def depth_rgb(x, y):
    return (x * 40, y * 60, 200)


def mask_byte(x, y):
    return (x * y * 3) % 256


def depth_word(x, y):
    return x * 10000 + y * 3000


def png_b64(img):
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def write_responses():
    chat = {
        "id": "chatcmpl-1",
        "object": "chat.completion",
        "choices": [
            {
                "index": 0,
                "message": {"role": "assistant", "content": '{"scene": "a moth resting on lichen-covered bark"}'},
                "finish_reason": "stop",
            }
        ],
    }
    (HERE / "chat_response.json").write_text(json.dumps(chat, indent=2) + "\n")

    mask = Image.new("L", (10, 10))
    mask.putdata([mask_byte(x, y) for y in range(10) for x in range(10)])
    (HERE / "segment_response.json").write_text(json.dumps({"mask_png_b64": png_b64(mask)}, indent=2) + "\n")

    depth = Image.new("I;16", (6, 4))
    depth.putdata([depth_word(x, y) for y in range(4) for x in range(6)])
    (HERE / "depth_response.json").write_text(json.dumps({"depth_png16_b64": png_b64(depth)}, indent=2) + "\n")


def decode(url_or_b64):
    data = url_or_b64.split(",", 1)[1] if url_or_b64.startswith("data:") else url_or_b64
    return Image.open(io.BytesIO(base64.b64decode(data)))


def check_rgb(img, w, h, f):
    assert img.size == (w, h) and img.mode == "RGB", (img.size, img.mode)
    for y in range(h):
        for x in range(w):
            assert img.getpixel((x, y)) == f(x, y), (x, y)


def check_requests():
    chat_path = HERE / "chat_request.json"
    if chat_path.exists():
        raw = chat_path.read_text()
        body = json.loads(raw)
        assert list(body) == ["model", "temperature", "max_tokens", "messages"]
        assert body["temperature"] == 0 and isinstance(body["temperature"], int)
        content = body["messages"][0]["content"]
        assert body["messages"][0]["role"] == "user"
        assert content[0]["type"] == "text"
        check_rgb(decode(content[1]["image_url"]["url"]), 4, 3, chat_rgb)
        preview = decode(content[2]["image_url"]["url"])
        assert preview.mode == "L" and preview.size == (4, 3)
        for y in range(3):
            for x in range(4):
                assert preview.getpixel((x, y)) == round((x + y) / 5 * 255), (x, y)

    seg_path = HERE / "segment_request.json"
    if seg_path.exists():
        body = json.loads(seg_path.read_text())
        assert list(body) == ["image_png_b64", "depth_png_b64", "boxes", "points"]
        check_rgb(decode(body["image_png_b64"]), 10, 10, seg_rgb)
        d = decode(body["depth_png_b64"])
        assert d.size == (10, 10)
        for x in range(10):
            assert d.getpixel((x, 0)) == round(x / 9 * 65535), x
        assert body["boxes"] == [[2, 3, 8, 9]]
        assert body["points"] == {"positive": [[4.5, 5.5]], "negative": [[1.5, 1.5]]}

    depth_path = HERE / "depth_request.json"
    if depth_path.exists():
        body = json.loads(depth_path.read_text())
        assert list(body) == ["image_png_b64"]
        check_rgb(decode(body["image_png_b64"]), 6, 4, depth_rgb)


if __name__ == "__main__":
    if "--check-only" not in sys.argv:
        write_responses()
    check_requests()
    print("wire fixtures ok")
