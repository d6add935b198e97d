"""Regenerate fixtures/header_fuzz.json from the server-side validator.

Each corpus file is a header variant followed by the same four valid body
rows. The recorded verdict says whether the server rejects the file before
reading any body row — an unparseable byte stream, an empty file, or a
header that does not normalize to epoch_id,grade,probability. The client
validator must agree with every verdict; the browser test suite replays
this file byte for byte.

Run from the repository root:  python3 frontend/scripts/generate_header_corpus.py
"""

import base64
import json
from pathlib import Path

from neurograde.competition import parse_submission_csv
from neurograde.errors import ValidationError

EPOCH_IDS = ["te000", "te001", "te002", "te003"]
BODY = "".join(f"{eid},{1 + i % 4},0.5\n" for i, eid in enumerate(EPOCH_IDS))

GOOD = "epoch_id,grade,probability"

variants: list[tuple[str, bytes]] = [
    ("exact", f"{GOOD}\n".encode()),
    ("crlf", f"{GOOD}\r\n".encode()),
    ("no-newline-after-header", GOOD.encode() + b"\n"),
    ("bom-exact", "﻿".encode() + f"{GOOD}\n".encode()),
    ("spaces-around-cells", b" epoch_id , grade , probability \n"),
    ("tabs-around-cells", b"\tepoch_id\t,\tgrade\t,\tprobability\t\n"),
    ("nbsp-padding", "epoch_id\xa0,\xa0grade,probability\xa0\n".encode()),
    ("line-separator-padding", "epoch_id ,grade,probability\n".encode()),
    ("quoted-cells", b'"epoch_id","grade","probability"\n'),
    ("quoted-cell-with-newline", b'"epoch_id\n",grade,probability\n'),
    ("mixed-quoting", b'epoch_id,"grade",probability\n'),
    ("double-bom", "﻿﻿".encode() + f"{GOOD}\n".encode()),
    ("zero-width-space", "epoch_id​,grade,probability\n".encode()),
    ("capitalized", b"Epoch_id,Grade,Probability\n"),
    ("upper", b"EPOCH_ID,GRADE,PROBABILITY\n"),
    ("reordered", b"grade,epoch_id,probability\n"),
    ("missing-probability", b"epoch_id,grade\n"),
    ("missing-grade", b"epoch_id,probability\n"),
    ("extra-column", b"epoch_id,grade,probability,confidence\n"),
    ("duplicated-column", b"epoch_id,grade,probability,probability\n"),
    ("trailing-comma", f"{GOOD},\n".encode()),
    ("leading-comma", f",{GOOD}\n".encode()),
    ("semicolons", b"epoch_id;grade;probability\n"),
    ("tab-delimited", b"epoch_id\tgrade\tprobability\n"),
    ("single-cell", b"epoch_id grade probability\n"),
    ("dashes", b"epoch-id,grade,probability\n"),
    ("plural", b"epoch_ids,grades,probabilities\n"),
    ("no-underscore", b"epochid,grade,probability\n"),
    ("joined-cells", b"epoch_idgrade,probability\n"),
    ("cyrillic-i", "epoch_іd,grade,probability\n".encode()),
    ("fullwidth-comma", "epoch_id，grade，probability\n".encode()),
    ("blank-first-line", f"\n{GOOD}\n".encode()),
    ("whitespace-first-line", f"   \n{GOOD}\n".encode()),
    ("empty-file-no-body", b""),
    ("newline-only-no-body", b"\n"),
    ("quote-after-text", b'epoch_id,grade,"probability"x\n'),
    ("text-before-quote", b' "epoch_id",grade,probability\n'),
    ("doubled-inner-quote", b'"epoch_id""x",grade,probability\n'),
    ("unterminated-quote", b'"epoch_id,grade,probability\n'),
    ("cr-terminated-header", GOOD.encode() + b"\r"),
    ("json-not-csv", b'{"epoch_id": 1}\n'),
    ("invalid-utf8", b"\xff\xfe" + GOOD.encode() + b"\n"),
    ("utf16-encoded", f"{GOOD}\n".encode("utf-16-le")),
    ("latin1-accent", GOOD.encode() + b" \xe9\n"),
    ("null-bytes", b"epoch_id\x00,grade,probability\n"),
    ("form-feed-padding", b"\x0cepoch_id,grade,probability\n"),
    ("vertical-tab-padding", b"\x0bepoch_id,grade,probability\n"),
    ("comment-line-first", f"# predictions\n{GOOD}\n".encode()),
    ("markdown-pipe", b"| epoch_id | grade | probability |\n"),
    ("trailing-spaces-line", f"{GOOD}   \n".encode()),
]
assert len(variants) == 50, len(variants)

PRE_BODY_MARKERS = (
    "header must be",
    "header row is not parseable",
    "file is empty",
    "file is not valid UTF-8",
)


def server_verdict(payload: bytes) -> dict:
    try:
        parse_submission_csv(payload, EPOCH_IDS)
    except ValidationError as exc:
        problems = [message for _, message in exc.problems]
        rejects_header = any(
            message.startswith(PRE_BODY_MARKERS) for message in problems
        )
        return {"accepted": False, "rejects_header": rejects_header,
                "problems": problems}
    return {"accepted": True, "rejects_header": False, "problems": []}


def main() -> None:
    entries = []
    for name, header in variants:
        payload = header if name.endswith("no-body") else header + BODY.encode()
        verdict = server_verdict(payload)
        entries.append({
            "name": name,
            "content_base64": base64.b64encode(payload).decode(),
            "server_rejects_header": verdict["rejects_header"],
            "server_accepts_file": verdict["accepted"],
            "server_problems": verdict["problems"],
        })
    out = Path(__file__).resolve().parent.parent / "fixtures" / "header_fuzz.json"
    out.write_text(json.dumps({"epoch_ids": EPOCH_IDS, "files": entries}, indent=1))
    rejected = sum(1 for e in entries if e["server_rejects_header"])
    print(f"wrote {out} ({len(entries)} files, {rejected} header rejections)")


if __name__ == "__main__":
    main()
