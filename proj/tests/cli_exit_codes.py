#!/usr/bin/env python3
"""Exit-code contract of the csmc CLI: 0 success, 2 configuration or usage
error, 3 runtime failure (for example an unwritable output directory).

usage: cli_exit_codes.py <csmc binary> <work dir>
"""
import shutil
import subprocess
import sys
from pathlib import Path


def main():
    cli, work = sys.argv[1], Path(sys.argv[2])
    shutil.rmtree(work, ignore_errors=True)
    work.mkdir(parents=True)
    (work / "bad.ini").write_text("[run]\nparticles = 0\n")
    (work / "unknown.ini").write_text("[nk]\nkappa_prime = 1\n")
    (work / "blocker").write_text("a file where a directory should be")
    tiny = ["--particles", "5", "--weeks", "3", "--threads", "1"]

    cases = [
        ("simulate ok", ["simulate", *tiny, "-o", str(work / "ok")], 0, None),
        ("topology ok", ["topology"], 0, "factor_graph"),
        ("help", ["--help"], 0, None),
        ("no subcommand", [], 2, None),
        ("unknown flag", ["simulate", "--frobnicate"], 2, None),
        ("zero particles", ["simulate", "--config", str(work / "bad.ini")], 2, "particles"),
        ("unknown key", ["simulate", "--config", str(work / "unknown.ini")], 2, "nk.kappa_prime"),
        ("missing config", ["simulate", "--config", str(work / "absent.ini")], 2, "absent.ini"),
        ("fiscal factor in 3N", ["simulate", *tiny, "--factors", "f1,f8"], 2, "f8"),
        ("bad override", ["simulate", *tiny, "--set", "nk.phi_pi=0.5"], 2, "phi_pi"),
        ("us-scale without fiscal", ["simulate", *tiny, "--calibration", "us-scale"], 2, "narratives"),
        ("unknown lens", ["salience", *tiny, "--lens", "nope"], 2, "nope"),
        ("unwritable output", ["simulate", *tiny, "-o", str(work / "blocker" / "sub")], 3, None),
    ]
    failures = 0
    for name, args, expected, needle in cases:
        done = subprocess.run([cli, *args], capture_output=True, text=True)
        text = done.stdout + done.stderr
        ok = done.returncode == expected and (needle is None or needle in text)
        failures += not ok
        print(f"{'ok  ' if ok else 'FAIL'} {name}: exit {done.returncode} (expected {expected})")
        if not ok:
            print(text.strip())
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
