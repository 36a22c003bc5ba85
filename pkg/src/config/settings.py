import os
from typing import Optional
from dotenv import load_dotenv

from src.errors import ConfigError

load_dotenv()


class Settings:
    """Application settings loaded from environment variables."""

    def __init__(self):
        self.out_dir_override: Optional[str] = os.getenv("RFM_RADAR_OUT") or None
        self.log_level: str = os.getenv("LOG_LEVEL", "INFO")
        self.threads: Optional[str] = os.getenv("RFM_RADAR_THREADS") or None
        self.redis_host: str = os.getenv("REDIS_HOST", "")
        self.redis_port: str = os.getenv("REDIS_PORT", "6379")
        self.redis_password: Optional[str] = os.getenv("REDIS_PASSWORD", None)
        self.redis_ttl: str = os.getenv("REDIS_TTL", "604800")
        self.debug_mode: bool = os.getenv("DEBUG_MODE", "false").lower() == "true"

    def validate(self) -> None:
        """Validate settings that must be numeric."""
        for name in ("redis_port", "redis_ttl"):
            value = getattr(self, name)
            if not value.isdigit():
                raise ConfigError(f"{name.upper()} must be a positive integer, got {value!r}")
        if self.threads is not None and (not self.threads.isdigit() or int(self.threads) < 1):
            raise ConfigError(f"RFM_RADAR_THREADS must be a positive integer, got {self.threads!r}")
        if self.log_level.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ConfigError(f"LOG_LEVEL {self.log_level!r} is not a logging level")

    @property
    def thread_cap(self) -> Optional[int]:
        return int(self.threads) if self.threads else None


settings = Settings()
