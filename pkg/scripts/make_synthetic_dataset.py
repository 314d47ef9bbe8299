#!/usr/bin/env python3
"""Generate a synthetic 4-archetype page dataset in the sorted
per-category layout expected by `pagesort --train`."""

import argparse

from pagesort.synthetic import ARCHETYPES, write_synthetic_dataset


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("output", help="dataset root directory")
    parser.add_argument("--pages", type=int, default=200,
                        help="pages per archetype (default 200)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    root = write_synthetic_dataset(args.output, pages_per_class=args.pages,
                                   seed=args.seed)
    print(f"wrote {args.pages} pages each for {', '.join(ARCHETYPES)} "
          f"under {root}")


if __name__ == "__main__":
    main()
