"""
Checking the network shape tables
=================================

Every row of the built-in layer tables is re-derived from its layer
parameters. Each row is applied to the previous row's *declared* shape, so
a bad row shows up once instead of spoiling everything downstream.
"""

# %%
from rics.archcheck import DISC_OMEGA, ArchSpec, concat, conv, infer_shapes, upsample, verify_builtin_tables

report = verify_builtin_tables()
print(report.format())

# %%
# The same table chained end to end lets the stride-2 row cascade.
chained = infer_shapes(DISC_OMEGA)
for row in chained.rows:
    print(row.row, row.layer, row.declared, "->", row.inferred, "" if row.match else "(mismatch)")

# %%
# Small custom U-Net fragment.
tiny = ArchSpec("tiny", (64, 64, 3), (
    conv(3, 8, 1, (64, 64, 8)),
    conv(4, 16, 2, (32, 32, 16)),
    upsample(2, (64, 64, 16)),
    concat(2, (64, 64, 24)),
))
print(infer_shapes(tiny).output)
