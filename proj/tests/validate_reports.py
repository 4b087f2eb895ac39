"""Run every CLI fixture and validate the emitted report against the JSON schema."""

import json
import pathlib
import subprocess
import sys

import jsonschema

RUNS = [
    ("check-ndk", ["--config", "check_sqdiff.json"]),
    ("check-ndk", ["--config", "check_sqdiff_strict.json"]),
    ("check-ndk", ["--config", "check_product.json"]),
    ("check-ndk", ["--config", "check_empty.json"]),
    ("check-m", ["--config", "check_m_pairing.json"]),
    ("check-m", ["--config", "check_m_neg_pairing.json"]),
    ("induce", ["--config", "induce_two_projection.json"]),
    ("induce", ["--config", "induce_single_projection.json", "--require-metric"]),
    ("induce", ["--config", "induce_sampler.json"]),
    ("induce", ["--config", "induce_sampler_noseed.json"]),
    ("embed", ["--matrix", "line_metric.csv"]),
    ("embed", ["--matrix", "star_metric.csv"]),
    ("embed", ["--config", "embed_induced.json"]),
    ("embed", ["--matrix", "single.csv"]),
    ("demo-example1", ["--config", "demo_coordinates.json"]),
    ("demo-example1", ["--config", "demo_constant.json", "--no-deterministic"]),
]


def main() -> int:
    cli, schema_path, data = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    schema = json.loads(schema_path.read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    failures = 0
    for command, args in RUNS:
        resolved = [a if a.startswith("--") else str(data / a) for a in args]
        proc = subprocess.run([cli, command, *resolved], capture_output=True, text=True, check=False)
        label = " ".join([command, *args])
        try:
            report = json.loads(proc.stdout)
        except json.JSONDecodeError as exc:
            print(f"FAIL {label}: stdout is not JSON ({exc})")
            failures += 1
            continue
        errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
        if report.get("exit_code") != proc.returncode:
            errors.append(f"exit_code {report.get('exit_code')} != process status {proc.returncode}")
        if errors:
            failures += 1
            print(f"FAIL {label}")
            for err in errors:
                print(f"  {getattr(err, 'message', err)}")
        else:
            print(f"ok   {label} (exit {proc.returncode})")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
