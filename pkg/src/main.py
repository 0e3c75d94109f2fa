"""メインエントリポイント（python -m src.main / jvm-by-pe）"""

import sys

from .presentation.cli import main


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
