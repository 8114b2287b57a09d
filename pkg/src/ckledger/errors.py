"""Exception hierarchy shared across the package."""

from __future__ import annotations


class CKLedgerError(Exception):
    """Base class for every error raised by this package."""


class PolicyError(CKLedgerError, ValueError):
    pass


class PolicySyntaxError(PolicyError):
    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class AuthenticationError(CKLedgerError):
    """AEAD tag did not verify: wrong key or modified bytes."""


class NotSatisfied(CKLedgerError):
    """The presented attribute key does not satisfy the ciphertext policy."""


class MalformedCiphertext(CKLedgerError, ValueError):
    pass


class DaemonError(CKLedgerError):
    pass


class DaemonExited(DaemonError):
    pass


class DaemonTimeout(DaemonError):
    pass


class NotFound(CKLedgerError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "not found"


class IntegrityError(CKLedgerError):
    """Stored bytes no longer hash to their content identifier."""


class LedgerError(CKLedgerError):
    pass


class AuthorityError(CKLedgerError):
    pass


class Unauthorized(CKLedgerError):
    pass


class PlanError(CKLedgerError, ValueError):
    pass
