#!/usr/bin/env python3
"""Regenerates src/unicode_tables.inc from CPython's unicodedata.

The text normalizer needs three codepoint classes (letter, decimal digit,
whitespace) plus a single-codepoint lowercase mapping. Rather than depend on
ICU at runtime, the tables are generated once and committed.

Usage: python3 tools/gen_unicode_tables.py > src/unicode_tables.inc
"""

import sys
import unicodedata

MAX_CP = 0x110000


def category(cp):
    return unicodedata.category(chr(cp))


def is_letter(cp):
    return category(cp).startswith("L")


def is_digit(cp):
    return category(cp) == "Nd"


def is_space(cp):
    # White_Space: Zs/Zl/Zp plus the usual control characters.
    return category(cp) in ("Zs", "Zl", "Zp") or cp in (
        0x09, 0x0A, 0x0B, 0x0C, 0x0D, 0x85)


def simple_lower(cp):
    """Single-codepoint lowercase; multi-codepoint expansions take the first
    codepoint when it is itself a letter (e.g. U+0130 -> 'i'), else identity."""
    lowered = chr(cp).lower()
    if len(lowered) == 1:
        return ord(lowered)
    first = ord(lowered[0])
    if unicodedata.category(lowered[0]).startswith("L"):
        return first
    return cp


def ranges(pred):
    out = []
    start = None
    for cp in range(MAX_CP):
        if pred(cp):
            if start is None:
                start = cp
        elif start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, MAX_CP - 1))
    return out


def main():
    lower = {}
    for cp in range(MAX_CP):
        lo = simple_lower(cp)
        if lo != cp:
            lower[cp] = lo

    # Sanity: the mapping must be idempotent and category-stable, otherwise
    # normalize() would not be idempotent. Drop any violating entry.
    for cp, lo in sorted(lower.items()):
        if simple_lower(lo) != lo:
            del lower[cp]
            continue
        if is_letter(cp) and not is_letter(lo):
            del lower[cp]
        if is_digit(cp) != is_digit(lo) and cp in lower:
            del lower[cp]

    letter_ranges = ranges(is_letter)
    digit_ranges = ranges(is_digit)
    space_list = [cp for cp in range(MAX_CP) if is_space(cp)]

    w = sys.stdout.write
    w("// Generated by tools/gen_unicode_tables.py (Unicode %s). Do not edit.\n"
      % unicodedata.unidata_version)
    w("\n")

    w("static const char32_t kLetterRanges[][2] = {\n")
    for a, b in letter_ranges:
        w("    {0x%X, 0x%X},\n" % (a, b))
    w("};\n\n")

    w("static const char32_t kDigitRanges[][2] = {\n")
    for a, b in digit_ranges:
        w("    {0x%X, 0x%X},\n" % (a, b))
    w("};\n\n")

    w("static const char32_t kSpaceList[] = {\n    ")
    w(", ".join("0x%X" % cp for cp in space_list))
    w("\n};\n\n")

    keys = sorted(lower)
    w("static const char32_t kLowerKeys[] = {\n")
    for i in range(0, len(keys), 8):
        w("    " + ", ".join("0x%X" % k for k in keys[i:i + 8]) + ",\n")
    w("};\n\n")
    w("static const char32_t kLowerVals[] = {\n")
    for i in range(0, len(keys), 8):
        w("    " + ", ".join("0x%X" % lower[k] for k in keys[i:i + 8]) + ",\n")
    w("};\n")


if __name__ == "__main__":
    main()
