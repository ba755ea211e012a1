"""Package entry point: ``python -m cdrsurrogate {train,analyze} ...``."""

import sys

from . import analysis, training


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print("usage: python -m cdrsurrogate {train,analyze} [options]")
        print("  train    --data train.cdr --out dir [--epochs N --seed S]")
        print("  analyze  --data test.cdr --checkpoint model.pt --out dir")
        return 0 if argv else 2
    command, rest = argv[0], argv[1:]
    try:
        if command == "train":
            return training.main(rest)
        if command == "analyze":
            return analysis.main(rest)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"error: unknown command {command!r}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
