"""Revocation-ready attribute-based key management over a content store and
a hash-chained metadata ledger."""

from ckledger.cas import ContentStore, content_id
from ckledger.ledger import Ledger, MetadataRecord
from ckledger.metering import Meter, Mode
from ckledger.policy import AND, OR, Attribute, canonicalize, leaf, parse, policy_id, satisfies
from ckledger.workflow import Workflow

__version__ = "0.1.0"

__all__ = [
    "AND",
    "OR",
    "Attribute",
    "ContentStore",
    "Ledger",
    "Meter",
    "MetadataRecord",
    "Mode",
    "Workflow",
    "canonicalize",
    "content_id",
    "leaf",
    "parse",
    "policy_id",
    "satisfies",
]
