"""ASAM OpenLABEL (polyline subset) reader and writer for curb sets.

Curbs are static, sequence-level objects::

    {"openlabel": {
        "metadata": {"schema_version": "1.0.0"},
        "objects": {"0": {"name": "curb0", "type": "curb",
                          "object_data": {"poly3d": [
                              {"name": "curb0", "closed": false, "val": [x0, y0, z0, ...]}]}}}}}

Unknown keys are ignored on read.  Output is canonical (objects in numeric
key order, shortest round-trip floats), so export -> import -> export is
byte-stable.
"""
import json
from pathlib import Path

import jsonschema

from .annotate.types import Curb, CurbSet, Polyline3D
from .exceptions import ParseError, SchemaError, ValidationError

SCHEMA_VERSION = "1.0.0"

SUBSET_SCHEMA = {
    "type": "object",
    "required": ["openlabel"],
    "properties": {
        "openlabel": {
            "type": "object",
            "required": ["metadata"],
            "properties": {
                "metadata": {
                    "type": "object",
                    "required": ["schema_version"],
                    "properties": {"schema_version": {"type": "string"},
                                   "annotator": {"type": "string"}},
                },
                "objects": {
                    "type": "object",
                    "propertyNames": {"pattern": "^(0|[1-9][0-9]*)$"},
                    "additionalProperties": {
                        "type": "object",
                        "required": ["name", "type", "object_data"],
                        "properties": {
                            "name": {"type": "string"},
                            "type": {"type": "string"},
                            "object_data": {
                                "type": "object",
                                "required": ["poly3d"],
                                "properties": {
                                    "poly3d": {
                                        "type": "array",
                                        "minItems": 1,
                                        "maxItems": 1,
                                        "items": {
                                            "type": "object",
                                            "required": ["name", "closed", "val"],
                                            "properties": {
                                                "name": {"type": "string"},
                                                "closed": {"type": "boolean"},
                                                "val": {"type": "array", "minItems": 6,
                                                        "items": {"type": "number"}},
                                            },
                                        },
                                    },
                                },
                            },
                        },
                    },
                },
            },
        },
    },
}

_validator = jsonschema.Draft7Validator(SUBSET_SCHEMA)


def export(curbs, annotator=None):
    """Build the OpenLABEL document (a dict) for ``curbs``."""
    metadata = {"schema_version": SCHEMA_VERSION}
    if annotator is not None:
        metadata["annotator"] = annotator
    objects = {}
    for curb in sorted(curbs, key=lambda c: c.id):
        name = f"curb{curb.id}"
        values = [float(v) for v in curb.polyline.vertices.reshape(-1)]
        objects[str(curb.id)] = {
            "name": name,
            "type": "curb",
            "object_data": {"poly3d": [{"name": name, "closed": False, "val": values}]},
        }
    return {"openlabel": {"metadata": metadata, "objects": objects}}


def dumps(doc):
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write(curbs, path, annotator=None):
    doc = export(curbs, annotator)
    Path(path).write_text(dumps(doc), encoding="utf-8")
    return doc


def validate(doc):
    """Raise :class:`SchemaError` unless ``doc`` fits the supported subset."""
    error = jsonschema.exceptions.best_match(_validator.iter_errors(doc))
    if error is not None:
        where = "/".join(str(p) for p in error.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {error.message}")
    for key, obj in doc["openlabel"].get("objects", {}).items():
        for poly in obj["object_data"]["poly3d"]:
            if len(poly["val"]) % 3:
                raise SchemaError(f"object {key}: val length {len(poly['val'])} is not a multiple of 3")


def from_document(doc):
    validate(doc)
    curbs = []
    for key, obj in doc["openlabel"].get("objects", {}).items():
        values = obj["object_data"]["poly3d"][0]["val"]
        try:
            polyline = Polyline3D([values[i:i + 3] for i in range(0, len(values), 3)])
        except ValidationError as exc:
            raise SchemaError(f"object {key}: {exc}") from None
        curbs.append(Curb(int(key), polyline))
    return CurbSet(tuple(sorted(curbs, key=lambda c: c.id)))


def loads(text):
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"invalid UTF-8 at byte {exc.start}", exc.start) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[:exc.pos].encode("utf-8"))
        raise ParseError(f"malformed JSON at byte {offset}: {exc.msg}", offset) from None
    return from_document(doc)


def read(path):
    """Import a CurbSet from an OpenLABEL file."""
    path = Path(path)
    try:
        return loads(path.read_bytes())
    except (ParseError, SchemaError) as exc:
        raise type(exc)(f"{path}: {exc}", *([exc.offset] if isinstance(exc, ParseError) else [])) from None
