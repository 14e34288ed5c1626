#!/usr/bin/env python3
"""Regenerates tests/unit/wavelet_reference.hpp from PyWavelets."""
import sys

import numpy as np
import pywt

CASES = [("db3", "Db3", 3), ("coif5", "Coif5", 1), ("bior2.4", "Bior24", 3)]


def main():
    x = np.array([np.sin(0.37 * i) + 0.05 * i + (i % 7) * 0.3 for i in range(64)])
    out = [
        "#pragma once",
        "",
        "// pywt.wavedec(x, name, mode='symmetric', level=L) for",
        "// x[i] = sin(0.37 i) + 0.05 i + 0.3 (i mod 7), i < 64.",
        "// Regenerate with tools/gen_wavelet_reference.py.",
        "",
        "#include <vector>",
        "",
        '#include "rigcast/dwt.hpp"',
        "",
        "namespace wavelet_reference {",
        "",
        "struct Case {",
        "  rigcast::dwt::Family family;",
        "  int level;",
        "  std::vector<double> coefficients;",
        "};",
        "",
        "inline const std::vector<Case>& cases() {",
        "  static const std::vector<Case> c = {",
    ]
    for name, enum, level in CASES:
        flat = np.concatenate(pywt.wavedec(x, name, mode="symmetric", level=level))
        out.append(f"      {{rigcast::dwt::Family::{enum}, {level}, {{")
        for i in range(0, len(flat), 4):
            out.append("          " + ", ".join("%.17g" % v for v in flat[i:i + 4]) + ",")
        out.append("      }},")
    out += ["  };", "  return c;", "}", "", "}  // namespace wavelet_reference", ""]
    sys.stdout.write("\n".join(out))


if __name__ == "__main__":
    main()
