from __future__ import annotations

import os
import sys

sys.path.append(os.path.abspath("."))

from src.cli.main import main


if __name__ == "__main__":
    raise SystemExit(main())
