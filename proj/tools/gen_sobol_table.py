#!/usr/bin/env python3
"""Regenerate include/galga/detail/sobol_table.hpp from the Joe-Kuo
new-joe-kuo-6.21201 direction numbers shipped with scipy.

Each dimension is stored as "poly m_1 ... m_s" where poly carries the
leading and trailing coefficient bits, so s = bit_length(poly) - 1.
"""
import sys
from pathlib import Path

import numpy as np
import scipy.stats

src = Path(scipy.stats.__file__).parent / "_sobol_direction_numbers.npz"
data = np.load(src)
poly, vinit = data["poly"], data["vinit"]

out = Path(sys.argv[1] if len(sys.argv) > 1 else
           Path(__file__).resolve().parent.parent / "include/galga/detail/sobol_table.hpp")

chunks = []
line = []
for d, p in enumerate(poly):
    s = int(p).bit_length() - 1
    line.append(" ".join(str(int(v)) for v in [p, *vinit[d][:s]]))
    if len(line) == 64:
        chunks.append(";".join(line) + ";")
        line = []
if line:
    chunks.append(";".join(line) + ";")

with open(out, "w") as f:
    f.write("// Generated by tools/gen_sobol_table.py. Do not edit.\n")
    f.write("// Joe-Kuo direction numbers (new-joe-kuo-6.21201), one record per\n")
    f.write("// dimension: primitive polynomial bits then the initial m_k values.\n")
    f.write("#pragma once\n\n#include <cstddef>\n\nnamespace galga::detail {\n\n")
    f.write(f"inline constexpr std::size_t kSobolMaxDim = {len(poly)};\n\n")
    f.write("inline constexpr const char kSobolTable[] =\n")
    for c in chunks:
        f.write(f'    "{c}"\n')
    f.write("    ;\n\n}  // namespace galga::detail\n")
