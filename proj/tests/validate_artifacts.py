#!/usr/bin/env python3
# Copyright 2026 The pkrr Authors
# SPDX-License-Identifier: Apache-2.0
"""Runs every CLI mode on small inputs and validates the JSON artifacts
against the schemas. Usage: validate_artifacts.py <pkrr binary> <schema dir>"""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def main():
    cli, schema_dir = sys.argv[1], pathlib.Path(sys.argv[2])
    schemas = {p.name.split(".")[0]: json.loads(p.read_text())
               for p in schema_dir.glob("*.schema.json")}
    failures = 0
    checked = 0

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)

        def run(name, *args, expect=0):
            out = tmp / name
            out.mkdir()
            proc = subprocess.run([cli, *args, "--out-dir", str(out)],
                                  capture_output=True, text=True)
            if proc.returncode != expect:
                raise SystemExit(f"{name}: exit {proc.returncode}, expected "
                                 f"{expect}\n{proc.stderr}")
            return out, proc

        def check(schema, doc, label):
            nonlocal failures, checked
            checked += 1
            try:
                jsonschema.validate(doc, schemas[schema])
            except jsonschema.ValidationError as e:
                failures += 1
                print(f"FAIL {label}: {e.message} at {list(e.absolute_path)}")

        gen, _ = run("gen", "generate", "--design", "homo_beta", "--n", "6",
                     "--t", "12")
        data = str(gen / "panel.csv")
        firm, _ = run("firm", "generate", "--design", "firm_analog", "--n",
                      "6", "--t", "10")

        out, _ = run("fit_homo", "fit-homo", "--data", data)
        check("fit_report", json.loads((out / "fit_report.json").read_text()),
              "fit-homo")
        out, _ = run("fit_homo_fixed", "fit-homo", "--data", data, "--eta",
                     "0.1")
        check("fit_report", json.loads((out / "fit_report.json").read_text()),
              "fit-homo fixed eta")
        out, _ = run("fit_hetero", "fit-hetero", "--data", data)
        check("fit_report", json.loads((out / "fit_report.json").read_text()),
              "fit-hetero")

        for kind, extra in [("g", []), ("mean", ["--unit", "u1"]),
                            ("prediction", ["--unit", "u2"])]:
            out, _ = run("iv_" + kind, "interval", "--data", data,
                         "--interval", kind, "--x", "0.5", *extra)
            check("interval", json.loads((out / "interval.json").read_text()),
                  "interval " + kind)
        out, _ = run("iv_beta", "interval", "--data",
                     str(firm / "panel.csv"), "--interval", "beta",
                     "--kernel", "add([0,1,2]:linear,[3]:gaussian(b=0.3))",
                     "--x", "0,0,0,0", "--coordinate", "2")
        check("interval", json.loads((out / "interval.json").read_text()),
              "interval beta")

        out, _ = run("mse", "simulate-mse", "--n", "5", "--t", "8", "--reps",
                     "3")
        check("mc_report", json.loads((out / "mc_report.json").read_text()),
              "simulate-mse")
        out, _ = run("cov", "simulate-coverage", "--n", "5", "--t", "8",
                     "--reps", "3", "--x-grid", "0.2,0.5")
        check("mc_report", json.loads((out / "mc_report.json").read_text()),
              "simulate-coverage")

        _, proc = run("err_missing", "fit-homo", "--data",
                      str(tmp / "absent.csv"), expect=2)
        check("error", json.loads(proc.stderr), "missing data error")
        _, proc = run("err_cap", "fit-homo", "--data", data, "--nt-cap",
                      "10", expect=4)
        check("error", json.loads(proc.stderr), "resource error")

    print(f"{checked - failures}/{checked} artifacts valid")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
