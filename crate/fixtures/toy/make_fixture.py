"""Regenerates corpus.jsonl and the replay responses for the toy corpus.

Run from the repository root after building the CLI:
    cargo build && python3 fixtures/toy/make_fixture.py
"""
import json
import pathlib
import re
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent
BIN = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "target/debug/metarepair").resolve()

BUGS = [
    {
        "bug_id": "Toy-1",
        "project": "sum",
        "source_file": "src/MathUtil.java",
        "name": "sumTo",
        "javadoc": "Returns 1 + 2 + ... + n, or 0 when n is not positive.",
        "trigger": "MathUtilTest::testSmall",
        "trace": "junit.framework.AssertionFailedError: expected:<6> but was:<3>\n\tat MathUtilTest.testSmall(MathUtilTest.java:3)\n\tat MathUtil.sumTo(MathUtil.java:7)",
        "test_files": ["test/MathUtilTest.java"],
        "fixed": "public static int {name}(int n) {{\n    int total = 0;\n    for (int i = 1; i <= n; i++) {{\n        total += i;\n    }}\n    return total;\n}}",
        "wrong": "public static int {name}(int n) {{\n    int total = 0;\n    for (int i = 0; i < n; i++) {{\n        total += i;\n    }}\n    return total;\n}}",
    },
    {
        "bug_id": "Toy-2",
        "project": "clamp",
        "source_file": "src/Range.java",
        "name": "clamp",
        "javadoc": None,
        "trigger": "RangeTest::testAbove",
        "trace": "junit.framework.AssertionFailedError: expected:<10> but was:<0>\n\tat RangeTest.testAbove(RangeTest.java:9)\n\tat Range.clamp(Range.java:6)",
        "test_files": ["test/RangeTest.java"],
        "fixed": "static int {name}(int value, int low, int high) {{\n    if (value < low) {{\n        return low;\n    }} else if (value > high) {{\n        return high;\n    }}\n    return value;\n}}",
        "wrong": "static int {name}(int value, int low, int high) {{\n    if (value < low) {{\n        return low;\n    }}\n    return high;\n}}",
    },
]


def method_span(text, name):
    m = re.search(r"^([ \t]*)((?:public |static |private )*int " + name + r"\()", text, re.M)
    start = m.start(2)
    depth = 0
    i = text.index("{", start)
    while True:
        if text[i] == "{":
            depth += 1
        elif text[i] == "}":
            depth -= 1
            if depth == 0:
                break
        i += 1
    line = text.count("\n", 0, start) + 1
    return {"start_offset": start, "end_offset": i + 1, "line": line, "column": len(m.group(1)) + 1}


def fenced(*blocks):
    return "".join(f"Candidate:\n```java\n{b}\n```\n" for b in blocks)


def main():
    with open(ROOT / "corpus.jsonl", "w") as out:
        for b in BUGS:
            src = (ROOT / "projects" / b["project"] / b["source_file"]).read_text()
            rec = {
                "bug_id": b["bug_id"],
                "project_path": f"projects/{b['project']}",
                "source_file": b["source_file"],
                "function_span": method_span(src, b["name"]),
                "javadoc": b["javadoc"],
                "trigger_test_name": b["trigger"],
                "stack_trace": b["trace"],
                "validation_command": "metarepair toy-test {project}",
                "timeout_s": 30,
                "test_files": b["test_files"],
            }
            out.write(json.dumps(rec) + "\n")

    replay = ROOT / "replay"
    replay.mkdir(exist_ok=True)
    for old in replay.glob("*.json"):
        old.unlink()
    with tempfile.TemporaryDirectory() as tmp:
        common = ["--corpus-manifest", str(ROOT / "corpus.jsonl"), "--output-dir", tmp, "--replay-dir", str(replay)]
        subprocess.run([BIN, "transform", *common], check=True)
        subprocess.run([BIN, "prompts", *common], check=True, stdout=subprocess.DEVNULL)
        for b in BUGS:
            for variant in ["original", "transformed"]:
                prompt = json.loads((pathlib.Path(tmp) / "prompts" / f"{b['bug_id']}__{variant}.json").read_text())
                if variant == "original":
                    name = b["name"]
                    responses = [
                        "The loop bound is off.\n" + fenced(b["wrong"].format(name=name), b["fixed"].format(name=name)),
                        fenced(b["wrong"].format(name=name)),
                    ]
                else:
                    manifest = json.loads((pathlib.Path(tmp) / "variants" / b["bug_id"] / "manifest.json").read_text())
                    name = manifest["rename_map"].get(b["name"], b["name"])
                    responses = [
                        fenced(b["fixed"].format(name=name).replace("return", "retrun", 1)),
                        fenced(b["fixed"].format(name=name)),
                        "I could not find the bug.",
                        fenced(b["fixed"].format(name=b["name"])),
                    ]
                (replay / f"{prompt['hash']}.json").write_text(json.dumps({"responses": responses}, indent=2) + "\n")


if __name__ == "__main__":
    main()
