#!/usr/bin/env python3
"""CLI contract: exit codes, JSON schemas, well-formed SVG, CSV headers.

Usage: cli_contract.py <rhale-binary> <schema-dir>
"""
import csv
import json
import subprocess
import sys
import tempfile
import xml.etree.ElementTree as ET
from pathlib import Path

import jsonschema

cli, schema_dir = sys.argv[1], Path(sys.argv[2])
schemas = {p.name.removesuffix(".schema.json"): json.loads(p.read_text()) for p in schema_dir.glob("*.schema.json")}
failed = []


def run(*args):
    return subprocess.run([cli, *map(str, args)], capture_output=True, text=True).returncode


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        failed.append(what)


def validate(path, schema):
    try:
        jsonschema.validate(json.loads(path.read_text()), schemas[schema])
        check(True, f"{path.name} matches {schema} schema")
    except (jsonschema.ValidationError, OSError, json.JSONDecodeError) as e:
        check(False, f"{path.name} matches {schema} schema: {e}")


def svg_ok(path):
    try:
        root = ET.parse(path).getroot()
        check(root.tag.endswith("svg"), f"{path.name} is SVG")
    except (ET.ParseError, OSError) as e:
        check(False, f"{path.name} parses as XML: {e}")


def header(path):
    with open(path, newline="") as f:
        return next(csv.reader(f))


with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp)

    check(run("synth", "--example", "simulation-c", "--n", 150, "--out", out / "s") == 0, "synth exits 0")
    validate(out / "s/ground_truth.json", "ground_truth")
    check(header(out / "s/data.csv") == ["x1", "x2", "x3"], "data.csv header")
    check(header(out / "s/gradients.csv") == ["x1", "x2", "x3"], "gradients.csv header")

    e = out / "e"
    code = run("explain", "--example", "running", "--n", 400, "--feature", "x1", "--baseline", "pdp-ice",
               "--format", "json,csv,svg", "--out", e)
    check(code == 0, "explain exits 0")
    validate(e / "effect.json", "effect")
    validate(e / "pdp_ice.json", "pdp_ice")
    svg_ok(e / "effect.svg")
    svg_ok(e / "pdp_ice.svg")
    check(header(e / "effect.csv") == ["x", "effect", "std"], "effect.csv header")

    check(run("explain", "--data", out / "s/data.csv", "--gradients", out / "s/gradients.csv", "--feature", 2,
              "--binning", "fixed:4", "--out", out / "d") == 0, "explain from data and gradients exits 0")
    validate(out / "d/effect.json", "effect")
    eff = json.loads((out / "d/effect.json").read_text())
    check(eff["effect_source"] == "supplied" and eff["binning"] == "fixed", "supplied effects with fixed bins")

    b = out / "b"
    check(run("bench", "--example", "nonlinear", "--trials", 2, "--n", 150, "--format", "json,csv,svg",
              "--out", b) == 0, "bench exits 0")
    validate(b / "bench.json", "bench")
    for m in ("l_mu", "l_sigma", "l_rho"):
        svg_ok(b / f"bench_{m}.svg")
    rows = list(csv.DictReader(open(b / "bench.csv", newline="")))
    ks = json.loads((b / "bench.json").read_text())["config"]["k_list"]
    check(len(rows) == 2 * (len(ks) + 1), "bench.csv has trials x (|K| + 1) rows")

    # Exit codes.
    check(run() == 2, "no subcommand exits 2")
    check(run("explain", "--example", "nope") == 2, "unknown example exits 2")
    check(run("explain", "--data", out / "s/data.csv", "--out", out / "x") == 2, "data without model exits 2")
    check(run("explain", "--example", "running", "--binning", "fixed:0", "--out", out / "x") == 2, "fixed:0 exits 2")
    check(run("explain", "--example", "running", "--binning", "file:" + str(out / "missing.json"),
              "--out", out / "x") == 2, "missing partition file exits 2")
    check(run("explain", "--example", "running", "--alpha", 1.5, "--out", out / "x") == 2, "alpha out of range exits 2")
    check(run("explain", "--example", "running", "--n", 50, "--n-ppb", 200, "--out", out / "x") == 3,
          "infeasible points-per-bin exits 3")
    check(run("bench", "--example", "running", "--trials", 1, "--n", 50, "--n-ppb", 200, "--out", out / "x") == 3,
          "infeasible benchmark exits 3")

print(f"{len(failed)} contract checks failed")
sys.exit(1 if failed else 0)
