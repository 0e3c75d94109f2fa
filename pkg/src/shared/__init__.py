"""共有コンポーネント - Result型・設定・ロギング・例外"""

from .config import Settings, get_settings
from .logging import configure_logging
from .result import Result

__all__ = ["Result", "Settings", "configure_logging", "get_settings"]
