"""``vibrofig`` command line: render figures from TOML spec files.

A spec file sets ``kind = "heatmap"`` or ``kind = "panels"`` plus the
keys documented on the corresponding render function.  Relative input
and output paths are resolved against the spec file's directory.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .csvio import SchemaError
from .render import render_heatmap, render_panels


def load_spec(path):
    path = Path(path)
    with open(path, "rb") as fh:
        spec = tomllib.load(fh)

    def resolve(p):
        return str((path.parent / p).resolve())

    if "input" in spec:
        spec["input"] = resolve(spec["input"])
    if "output" in spec:
        spec["output"] = resolve(spec["output"])
    for panel in spec.get("panels", []):
        panel["inputs"] = [resolve(p) for p in panel.get("inputs", [])]
    return spec


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="vibrofig",
        description="Render figures from vibroprobe CSV artifacts.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="render one spec file")
    p_render.add_argument("--spec", required=True, action="append",
                          help="TOML figure spec (repeatable)")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO, format="%(message)s")
    for spec_path in args.spec:
        try:
            spec = load_spec(spec_path)
            kind = spec.get("kind")
            if kind == "heatmap":
                out = render_heatmap(spec)
            elif kind == "panels":
                out = render_panels(spec)
            else:
                raise SchemaError(f"{spec_path}: kind must be 'heatmap' "
                                  f"or 'panels', got {kind!r}")
        except (OSError, SchemaError, KeyError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
