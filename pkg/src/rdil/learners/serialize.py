"""Versioned JSON serialization of trained models.

Floats are written with ``repr`` precision by the json module, so a
save/load round trip reproduces every parameter exactly.
"""

import json
from pathlib import Path

from ..data import Attribute, Schema

FORMAT = "rdil-model"
VERSION = 1


def schema_to_dict(schema: Schema) -> dict:
    def attr(a):
        return {"name": a.name, "values": None if a.values is None else list(a.values)}

    return {
        "relation": schema.relation,
        "attributes": [attr(a) for a in schema.attributes],
        "class": attr(schema.class_attribute),
    }


def schema_from_dict(s: dict) -> Schema:
    def attr(a):
        values = a["values"]
        return Attribute(a["name"], None if values is None else tuple(values))

    return Schema(tuple(attr(a) for a in s["attributes"]), attr(s["class"]), s.get("relation", "data"))


def dumps_model(model) -> str:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "kind": model.kind,
        "spec": model.spec.to_dict(),
        "fingerprint": model.fingerprint,
        "schema": schema_to_dict(model.schema),
        "state": model.state_dict(),
    }
    return json.dumps(doc, sort_keys=True)


def loads_model(text: str):
    from . import MODEL_CLASSES, LearnerSpec

    doc = json.loads(text)
    if doc.get("format") != FORMAT:
        raise ValueError("not a serialized model")
    if doc.get("version") != VERSION:
        raise ValueError(f"unsupported model format version {doc.get('version')!r}")
    spec = LearnerSpec.from_dict(doc["spec"])
    cls = MODEL_CLASSES[doc["kind"]]
    return cls.from_state(spec, schema_from_dict(doc["schema"]), doc["fingerprint"], doc["state"])


def save_model(model, path) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8")


def load_model(path):
    return loads_model(Path(path).read_text(encoding="utf-8"))
