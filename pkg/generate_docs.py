import os
import subprocess
import shutil

# Create the target doc folder if not exists
os.makedirs("doc", exist_ok=True)

modules = [
    "exp_divdiff.errors",
    "exp_divdiff.scaled",
    "exp_divdiff.nodes",
    "exp_divdiff.compensated",
    "exp_divdiff.ddcore",
    "exp_divdiff.oracle",
    "exp_divdiff.bounds",
    "exp_divdiff.inequalities",
    "exp_divdiff.identities",
    "exp_divdiff.sweeps",
    "exp_divdiff.models",
    "exp_divdiff.settings",
    "exp_divdiff.history",
    "exp_divdiff.utils",
    "exp_divdiff.log",
    "exp_divdiff.cli",
]

for mod in modules:
    print(f"Generating docs for {mod}...")
    subprocess.run(["python", "-m", "pydoc", "-w", mod])
    output_filename = mod + ".html"
    shutil.move(output_filename, os.path.join("doc", os.path.basename(output_filename)))
