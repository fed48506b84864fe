"""figgen command line: `figgen <spec.json>` or flag form
`figgen --kind ee-curve --in energies.csv --out fig.svg`."""

from __future__ import annotations

import argparse
import json
import sys

from .render import KINDS, FigureSpec, render
from .schema import SchemaError


def _spec_from_json(path):
    with open(path) as fh:
        data = json.load(fh)
    figures = data["figures"] if "figures" in data else [data]
    return [FigureSpec(kind=f["kind"], inputs=tuple(f["inputs"]),
                       output=f["output"],
                       shade_below=f.get("shade_below"),
                       x_unit=f.get("x_unit"), title=f.get("title", ""),
                       image_format=f.get("format", "svg"))
            for f in figures]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="figgen")
    parser.add_argument("specfile", nargs="?", help="JSON figure spec")
    parser.add_argument("--kind", choices=KINDS)
    parser.add_argument("--in", dest="inputs", action="append", default=[])
    parser.add_argument("--out", dest="output")
    parser.add_argument("--shade-below", type=float, default=None)
    parser.add_argument("--x-unit", choices=["nm"], default=None)
    parser.add_argument("--title", default="")
    args = parser.parse_args(argv)
    try:
        if args.specfile:
            specs = _spec_from_json(args.specfile)
        else:
            if not (args.kind and args.inputs and args.output):
                parser.error("flag form needs --kind, --in and --out")
            specs = [FigureSpec(args.kind, tuple(args.inputs), args.output,
                                shade_below=args.shade_below,
                                x_unit=args.x_unit, title=args.title)]
        for spec in specs:
            render(spec)
            print(f"wrote {spec.output}")
    except (SchemaError, FileNotFoundError, KeyError) as exc:
        print(f"figgen error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
