"""Emit the dynamic benchmark variants shipped under data/.

Each variant takes the static instance, draws disclosure times for the
chosen fraction of customers with a fixed seed, and writes the extended
format (trailing AVAILABLE TIME column) next to its parent file.
"""
import os

from dvrptw import make_dynamic_variant, parse_instance, serialize_instance

DATA = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                    "data")

VARIANTS = [
    ("C101", 0.5, 1051),
    ("C101", 1.0, 1011),
    ("C201", 0.5, 2051),
    ("C201", 1.0, 2011),
    ("R201", 1.0, 9011),
]


def main():
    for name, level, seed in VARIANTS:
        with open(os.path.join(DATA, name + ".txt")) as f:
            inst = parse_instance(f.read())
        var = make_dynamic_variant(inst, level, seed)
        out = os.path.join(DATA, "%s.txt" % var.name)
        with open(out, "w") as f:
            f.write(serialize_instance(var))
        n_dyn = sum(1 for c in var.customers[1:] if c.available > 0)
        print("%s: %d dynamic, %d a-priori -> %s"
              % (var.name, n_dyn, var.n_customers - n_dyn, out))


if __name__ == "__main__":
    main()
