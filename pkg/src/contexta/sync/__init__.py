"""Multi-tenant sync service: auth, isolated stores, incremental upload, SSE."""

from .app import create_app
from .auth import (
    AuthError,
    CredentialStore,
    DuplicateUser,
    ExpiredToken,
    InvalidCredentials,
    issue_token,
    load_or_create_key,
    verify_token,
)
from .client import SyncClient, SyncClientError, UploadBuffer
from .storage import (
    MalformedBatch,
    RECORD_TYPES,
    StaleBatch,
    StorageRouter,
    SyncBatch,
    SyncRecord,
    TenantStore,
    UploadAck,
)
from .streamhub import StreamEvent, StreamHub

__all__ = [
    "AuthError",
    "create_app",
    "CredentialStore",
    "DuplicateUser",
    "ExpiredToken",
    "InvalidCredentials",
    "issue_token",
    "load_or_create_key",
    "MalformedBatch",
    "RECORD_TYPES",
    "StaleBatch",
    "StorageRouter",
    "StreamEvent",
    "StreamHub",
    "SyncBatch",
    "SyncClient",
    "SyncClientError",
    "SyncRecord",
    "TenantStore",
    "UploadAck",
    "UploadBuffer",
    "verify_token",
]
