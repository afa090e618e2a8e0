"""Credential store and HS256 token issuance.

Secrets are salted PBKDF2 hashes in the main database; tenant data lives
elsewhere. Tokens are compact JWS (header.payload.signature) signed with a
server-local key, subject = user id, 24 h expiry.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import json
import os
import sqlite3
import threading
import time
from pathlib import Path

__all__ = [
    "AuthError",
    "DuplicateUser",
    "InvalidCredentials",
    "ExpiredToken",
    "CredentialStore",
    "issue_token",
    "verify_token",
    "TOKEN_TTL_S",
]

TOKEN_TTL_S = 24 * 3600
_PBKDF2_ITERATIONS = 60_000


class AuthError(Exception):
    pass


class DuplicateUser(AuthError):
    pass


class InvalidCredentials(AuthError):
    pass


class ExpiredToken(AuthError):
    pass


def _b64url(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).rstrip(b"=").decode("ascii")


def _b64url_decode(data: str) -> bytes:
    pad = "=" * (-len(data) % 4)
    return base64.urlsafe_b64decode(data + pad)


def issue_token(user_id: str, key: bytes, now_s: float | None = None, ttl_s: int = TOKEN_TTL_S) -> str:
    now = int(now_s if now_s is not None else time.time())
    header = _b64url(json.dumps({"alg": "HS256", "typ": "JWT"}, separators=(",", ":")).encode())
    payload = _b64url(
        json.dumps(
            {"sub": user_id, "iat": now, "exp": now + ttl_s}, separators=(",", ":")
        ).encode()
    )
    signing_input = f"{header}.{payload}".encode("ascii")
    sig = _b64url(hmac.new(key, signing_input, hashlib.sha256).digest())
    return f"{header}.{payload}.{sig}"


def verify_token(token: str, key: bytes, now_s: float | None = None) -> str:
    """Return the subject user id; raise on bad signature or expiry."""
    parts = token.split(".")
    if len(parts) != 3:
        raise InvalidCredentials("malformed token")
    header_b64, payload_b64, sig_b64 = parts
    signing_input = f"{header_b64}.{payload_b64}".encode("ascii")
    expected = hmac.new(key, signing_input, hashlib.sha256).digest()
    try:
        provided = _b64url_decode(sig_b64)
    except Exception:
        raise InvalidCredentials("malformed token signature") from None
    if not hmac.compare_digest(expected, provided):
        raise InvalidCredentials("bad token signature")
    try:
        payload = json.loads(_b64url_decode(payload_b64))
        header = json.loads(_b64url_decode(header_b64))
    except Exception:
        raise InvalidCredentials("malformed token payload") from None
    if header.get("alg") != "HS256":
        raise InvalidCredentials("unsupported token algorithm")
    now = now_s if now_s is not None else time.time()
    if payload.get("exp", 0) <= now:
        raise ExpiredToken("token expired")
    sub = payload.get("sub")
    if not isinstance(sub, str) or not sub:
        raise InvalidCredentials("token missing subject")
    return sub


def load_or_create_key(path: str | Path) -> bytes:
    """Read the signing key file, creating a fresh random key when absent."""
    p = Path(path)
    if p.exists():
        key = p.read_bytes().strip()
        if len(key) < 16:
            raise ValueError(f"JWT key file {p} too short")
        return key
    p.parent.mkdir(parents=True, exist_ok=True)
    key = base64.b64encode(os.urandom(32))
    p.write_bytes(key)
    return key


class CredentialStore:
    """userId -> salted hash, in the main (non-tenant) database."""

    def __init__(self, db_path: str | Path):
        self._path = str(db_path)
        self._lock = threading.Lock()
        with self._connect() as conn:
            conn.execute(
                "CREATE TABLE IF NOT EXISTS users ("
                " user_id TEXT PRIMARY KEY,"
                " salt BLOB NOT NULL,"
                " hash BLOB NOT NULL,"
                " created_at REAL NOT NULL)"
            )

    def _connect(self) -> sqlite3.Connection:
        conn = sqlite3.connect(self._path, check_same_thread=False)
        conn.execute("PRAGMA journal_mode=WAL")
        return conn

    @staticmethod
    def _hash(secret: str, salt: bytes) -> bytes:
        return hashlib.pbkdf2_hmac("sha256", secret.encode(), salt, _PBKDF2_ITERATIONS)

    def register(self, user_id: str, secret: str) -> None:
        if not user_id or not secret:
            raise InvalidCredentials("user id and secret are required")
        salt = os.urandom(16)
        digest = self._hash(secret, salt)
        with self._lock, self._connect() as conn:
            try:
                conn.execute(
                    "INSERT INTO users (user_id, salt, hash, created_at) VALUES (?,?,?,?)",
                    (user_id, salt, digest, time.time()),
                )
            except sqlite3.IntegrityError:
                raise DuplicateUser(user_id) from None

    def verify(self, user_id: str, secret: str) -> bool:
        with self._lock, self._connect() as conn:
            row = conn.execute(
                "SELECT salt, hash FROM users WHERE user_id = ?", (user_id,)
            ).fetchone()
        if row is None:
            return False
        salt, stored = row
        return hmac.compare_digest(self._hash(secret, salt), stored)

    def exists(self, user_id: str) -> bool:
        with self._lock, self._connect() as conn:
            row = conn.execute(
                "SELECT 1 FROM users WHERE user_id = ?", (user_id,)
            ).fetchone()
        return row is not None
