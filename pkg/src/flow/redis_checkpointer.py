"""Redis cache for trained detector checkpoints."""

import logging
from typing import List, Optional, Tuple

import redis

from src.config.settings import Settings
from src.flow.checkpoint import checkpoint_digest

logger = logging.getLogger(__name__)


class RedisCheckpointStore:
    """Redis-based store for RFN1 checkpoint blobs.

    Each blob is kept under its content digest and as the scenario's
    ``latest`` entry, both with a TTL so stale detectors expire.
    """

    def __init__(
        self,
        redis_client: redis.Redis,
        namespace: str = "rfm_radar:checkpoint",
        ttl: int = 604800,  # 7 days default
    ):
        """Initialize the store.

        Args:
            redis_client: Redis client instance (bytes mode)
            namespace: Key prefix for all checkpoints
            ttl: Time-to-live for entries in seconds
        """
        self.redis = redis_client
        self.namespace = namespace
        self.ttl = ttl

    def _make_key(self, scenario_label: str, digest: Optional[str] = None) -> str:
        return ":".join([self.namespace, scenario_label, digest or "latest"])

    def put(self, scenario_label: str, blob: bytes) -> str:
        """Store a checkpoint blob.

        Args:
            scenario_label: Scenario the detector was trained for (e.g. cGN+AWGN)
            blob: Raw RFN1 bytes

        Returns:
            Content digest the blob was stored under
        """
        digest = checkpoint_digest(blob)
        self.redis.setex(self._make_key(scenario_label, digest), self.ttl, blob)
        self.redis.setex(self._make_key(scenario_label), self.ttl, blob)
        logger.info("Cached checkpoint %s for %s", digest, scenario_label)
        return digest

    def get(self, scenario_label: str, digest: Optional[str] = None) -> Optional[bytes]:
        """Fetch a blob by digest, or the scenario's latest one.

        Returns:
            Raw bytes or None if absent/expired
        """
        return self.redis.get(self._make_key(scenario_label, digest))

    def list(self, scenario_label: Optional[str] = None) -> List[Tuple[str, int]]:
        """List cached checkpoints as ``(key, ttl_seconds)``, skipping ``latest`` aliases."""
        pattern = f"{self.namespace}:{scenario_label}:*" if scenario_label else f"{self.namespace}:*"
        entries = []
        for key in sorted(self.redis.keys(pattern)):
            name = key.decode() if isinstance(key, bytes) else key
            if name.endswith(":latest"):
                continue
            entries.append((name, int(self.redis.ttl(key))))
        return entries


def connect_checkpoint_store(config: Settings) -> Optional[RedisCheckpointStore]:
    """Connect to Redis when configured.

    Returns:
        A store after a successful ping, or None so callers fall back to
        file-only persistence.
    """
    if not config.redis_host:
        logger.info("Redis not configured, using file-only checkpoints")
        return None
    try:
        client = redis.Redis(
            host=config.redis_host,
            port=int(config.redis_port),
            password=config.redis_password if config.redis_password else None,
            decode_responses=False,
            socket_connect_timeout=5,
            socket_timeout=5,
        )
        client.ping()
    except redis.exceptions.ConnectionError as e:
        logger.warning("⚠ Redis connection failed (%s); falling back to file-only checkpoints", e)
        return None
    except Exception as e:
        logger.warning("⚠ Redis initialization failed (%s); falling back to file-only checkpoints", e)
        return None
    logger.info("✓ Connected to Redis at %s:%s", config.redis_host, config.redis_port)
    return RedisCheckpointStore(client, ttl=int(config.redis_ttl))
