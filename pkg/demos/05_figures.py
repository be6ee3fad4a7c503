# %% [markdown]
# # Performance figures as CSV and SVG
#
# Writes the squeezing-vs-coupling curves, the OAT-minus-TAT surface and the
# optimized squeezing vs optical depth into ./figures_out.  The same files
# come from `squeeze figure 2a|2b|2c -o figures_out`.

# %%
import sys
from pathlib import Path

from cavsqueeze import cli

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("figures_out")
for fig in ("2a", "2b", "2c"):
    code = cli.main(["figure", fig, "-o", str(out)])
    print(f"figure {fig}: exit {code}")
print(sorted(p.name for p in out.iterdir()))
