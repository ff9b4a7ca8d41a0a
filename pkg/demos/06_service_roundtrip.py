# Drive the HTTP service end to end, in process.
#
# The same flow works against `uvicorn logan.service:app` over the wire;
# the in-process client (needs the `test` extra for httpx) keeps this
# demo self-contained. Renders are cached by ETag: re-requesting with
# If-None-Match returns 304 and no body until the log changes.

from pathlib import Path

from fastapi.testclient import TestClient

from logan import create_app, instantiate_model
from logan.demo import build_demo_bank, build_demo_session

out_dir = Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

_, source = build_demo_session()
app = create_app({"toy:7": instantiate_model("toy:7")},
                 bank=build_demo_bank(source))
client = TestClient(app)

print(client.get("/healthz").json())

created = client.post("/sessions", json={
    "model": "toy:7", "seed": 1, "demo_segmentation": True}).json()
sid = created["id"]
print(f"session {sid} etag={created['etag'][:12]}...")

render = client.get(f"/sessions/{sid}/render")
etag = render.headers["etag"]
cached = client.get(f"/sessions/{sid}/render",
                    headers={"If-None-Match": etag})
print(f"unchanged render -> {cached.status_code} (no bytes re-sent)")

resp = client.post(f"/sessions/{sid}/edits",
                   json={"op": "insert", "object": "bed_c",
                         "position": [38, 18]})
print(f"edit -> {resp.status_code}, log now {resp.json()['log']}")

# stale tag after the edit: full re-render comes back
fresh = client.get(f"/sessions/{sid}/render",
                   headers={"If-None-Match": etag})
print(f"render after edit -> {fresh.status_code}")
(out_dir / "service_render.png").write_bytes(fresh.content)

layout = client.get(f"/sessions/{sid}/layout").json()
print(f"layout key point: {layout['layout']['key_point']}")
print(f"wrote {out_dir / 'service_render.png'}")
