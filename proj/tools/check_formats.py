# Copyright 2026 The edaflow Authors
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Run the CLI on the fixtures and validate every JSON artifact against docs/formats."""

import json
import pathlib
import shutil
import subprocess
import sys
import tempfile

import jsonschema
import referencing

BASE = "https://edaflow.dev/formats/"


def registry(formats):
    resources = []
    for path in sorted(formats.glob("*.schema.json")):
        schema = json.loads(path.read_text())
        resources.append((BASE + path.name, referencing.Resource.from_contents(schema)))
    return referencing.Registry().with_resources(resources)


def main():
    cli, source = (pathlib.Path(a).resolve() for a in sys.argv[1:3])
    formats = source / "docs" / "formats"
    reg = registry(formats)
    failures = 0

    def check(doc, schema_name, label):
        nonlocal failures
        schema = reg.get_or_retrieve(BASE + schema_name).value.contents
        validator = jsonschema.Draft202012Validator(schema, registry=reg)
        errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
        for e in errors:
            print(f"FAIL {label}: {'/'.join(map(str, e.path))}: {e.message}")
        if not errors:
            print(f"ok   {label}")
        failures += len(errors)

    with tempfile.TemporaryDirectory() as tmp:
        work = pathlib.Path(tmp)
        shutil.copytree(source / "fixtures", work / "fixtures")

        def run(*args, expect=0):
            proc = subprocess.run([str(cli), *args], cwd=work, capture_output=True, text=True)
            if proc.returncode != expect:
                sys.exit(f"{' '.join(args)} exited {proc.returncode}: {proc.stderr}")

        job = "fixtures/picorv32_job.json"
        run("run-flow", "--job", job, "--mode", "allocate", "--deadline", "480", "--out", "h")
        run("run-flow", "--job", job, "--mode", "allocate", "--deadline", "400", "--out", "h",
            expect=2)
        run("run-flow", "--job", job, "--mode", "dse", "--dse-budget", "8", "--out", "h")
        run("run-flow", "--job", "fixtures/gcd_job.json", "--out", "h")
        run("allocate", "--options", "fixtures/picorv32_options.json", "--budget", "480",
            "--out", "plan.json")
        run("predict-train", "--samples", "200", "--out", "model.json")
        run("predict", "--model", "model.json", "--cells", "11000", "--stage", "routing",
            "--out", "pred.json")
        run("dse", "--job", job, "--budget", "8", "--out", "dse")
        run("simulate", "--tasks", "fixtures/eight_uniform.json", "--compare", "1x8",
            "--out", "sched.json")
        run("history", "--root", "h", "--out", "hist.json")

        def load(p):
            return json.loads((work / p).read_text())

        def lines(p):
            return [json.loads(l) for l in (work / p).read_text().splitlines() if l]

        for name in ("picorv32_job.json", "gcd_job.json"):
            check(load("fixtures/" + name), "job.schema.json", name)
        check(load("fixtures/picorv32_options.json"), "options.schema.json", "options")
        check(load("fixtures/eight_uniform.json"), "tasks.schema.json", "tasks")
        for p in sorted((source / "data" / "prices").glob("*.json")):
            check(json.loads(p.read_text()), "price_list.schema.json", p.name)
        for p in sorted((source / "data" / "faults").glob("*.json")):
            check(json.loads(p.read_text()), "fault_list.schema.json", p.name)
        check(json.loads((source / "data" / "dse" / "default_space.json").read_text()),
              "param_space.schema.json", "default_space")
        check([{"id": "n0", "vcpu_capacity": 8, "allocated": 2}], "cluster.schema.json",
              "cluster")

        runs = sorted((work / "h" / "runs").glob("run-*"))
        if len(runs) != 4:
            sys.exit(f"expected 4 runs, found {len(runs)}")
        for r in runs:
            rel = r.relative_to(work)
            check(load(rel / "report.json"), "report.schema.json", f"{r.name}/report.json")
            check(load(rel / "tasks.json"), "plan_tasks.schema.json", f"{r.name}/tasks.json")
            check(load(rel / "jobspec.json"), "job.schema.json", f"{r.name}/jobspec.json")
            for i, ev in enumerate(lines(rel / "events.jsonl")):
                check(ev, "run_event.schema.json", f"{r.name}/events.jsonl:{i + 1}")
        check(lines("h/runs/index.jsonl"), "history.schema.json", "index.jsonl")
        check(load("hist.json"), "history.schema.json", "history")
        check(load("plan.json"), "allocation_plan.schema.json", "plan")
        check(load("model.json"), "runtime_model.schema.json", "runtime model")
        check(load("pred.json"), "predictions.schema.json", "predictions")
        check(load("dse/dse_report.json"), "dse_report.schema.json", "dse report")
        check(load("sched.json"), "schedule.schema.json", "schedule")
        header = (work / "dse" / "trace.csv").read_text().splitlines()[0]
        if header != "trial,objective,best_so_far":
            print(f"FAIL trace.csv header: {header}")
            failures += 1

    print(f"{failures} schema violations")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
