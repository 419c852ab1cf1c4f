#!/usr/bin/env python3
"""Assemble corpus.txt for the n-gram suggester demo.

Sources, in order:
  primer.txt                      original networking/virtualization primer
  Python reference topics         pydoc_data.topics (PSF licence)
  CMake documentation             <cmake>/Help/**/*.rst (BSD-3-Clause)

Markup lines (code samples, rst directives, tables) are dropped; what stays
is running prose. Output is deterministic for a given set of inputs.
"""
import argparse
import glob
import os
import re
import sys

TARGET_BYTES = 1_000_000


def prose_lines(text):
    out = []
    in_code = False
    for raw in text.splitlines():
        line = raw.rstrip()
        if not line.strip():
            in_code = False
            out.append("")
            continue
        if line.endswith("::"):
            in_code = True
            line = line[:-1]
        elif in_code and raw[:1] in (" ", "\t"):
            continue
        s = line.strip()
        if "::=" in s or s.startswith((".. ", ">>>", "...", "$ ", "|", "+-", "=", "*", "#")) or re.fullmatch(r"[-=~^\"'`:.*+#]{3,}", s):
            continue
        s = re.sub(r":[a-z:]+:`([^`<]*?)(?:\s*<[^>]*>)?`", r"\1", s)  # roles
        s = re.sub(r"``([^`]*)``", r"\1", s)
        s = re.sub(r"`([^`<]*?)(?:\s*<[^>]*>)?`_*", r"\1", s)
        s = s.replace("**", "")
        letters = sum(c.isalpha() for c in s)
        if letters < 0.6 * len(s) or len(s.split()) < 4:
            continue
        out.append(s)
    return out


def paragraphs(lines):
    text = "\n".join(lines)
    for para in re.split(r"\n\s*\n", text):
        para = " ".join(para.split())
        if len(para.split()) >= 8:
            yield para


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--cmake-help", default=sorted(glob.glob("/usr/share/cmake-*/Help"))[-1:] or [None], nargs=1)
    ap.add_argument("-o", "--output", default=os.path.join(here, "corpus.txt"))
    args = ap.parse_args()

    parts = [open(os.path.join(here, "primer.txt"), encoding="utf-8").read()]

    from pydoc_data.topics import topics
    for key in sorted(topics):
        parts.extend(paragraphs(prose_lines(topics[key])))

    total = sum(len(p.encode()) + 2 for p in parts)
    help_dir = args.cmake_help[0]
    if help_dir:
        for path in sorted(glob.glob(os.path.join(help_dir, "**", "*.rst"), recursive=True)):
            for para in paragraphs(prose_lines(open(path, encoding="utf-8").read())):
                if total >= TARGET_BYTES:
                    break
                parts.append(para)
                total += len(para.encode()) + 2

    with open(args.output, "w", encoding="utf-8") as f:
        f.write("\n\n".join(p.strip() for p in parts) + "\n")
    print(f"wrote {args.output}: {os.path.getsize(args.output)} bytes", file=sys.stderr)


if __name__ == "__main__":
    main()
