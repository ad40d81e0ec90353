"""contribkit: community contributions for a materials database.

The pieces, bottom to top:

* :mod:`contribkit.mpfile` — the hierarchical text format: parse,
  validate, serialize, shared-section embedding.
* :mod:`contribkit.identifiers` — database ids, project handles, and
  chemical compositions used as root-section names.
* :mod:`contribkit.recipes` — XAS/XMCD pre-processing that writes derived
  values back into the file.
* :mod:`contribkit.contributions` / :mod:`contribkit.store` — per-root
  submission drafts and the versioned, sandboxed record store with its
  staged/approved/released review lifecycle.
* :mod:`contribkit.builder` — correlation with a core materials index,
  merged detail views, and the binned 2D property grid.
* :mod:`contribkit.service` / :mod:`contribkit.cli` — the REST boundary
  and the contributor command line, both running the same
  :mod:`contribkit.ingest` pipeline.
"""

from .contributions import Contribution, SplitError, split_contributions
from .identifiers import (
    CompositionId,
    CoreId,
    Identifier,
    IdentifierError,
    ProjectId,
    parse_identifier,
)
from .mpfile import (
    Document,
    EmbedCollisionError,
    Finding,
    KeyValueList,
    MPFileError,
    MPFileParseError,
    Section,
    Table,
    ValidationReport,
    embed_general,
    parse_mpfile,
    serialize_mpfile,
    validate_document,
)
from .store import AccessContext, ContributionStore

__version__ = "0.1.0"

__all__ = [
    "AccessContext",
    "CompositionId",
    "Contribution",
    "ContributionStore",
    "CoreId",
    "Document",
    "EmbedCollisionError",
    "Finding",
    "Identifier",
    "IdentifierError",
    "KeyValueList",
    "MPFileError",
    "MPFileParseError",
    "ProjectId",
    "Section",
    "SplitError",
    "Table",
    "ValidationReport",
    "embed_general",
    "parse_identifier",
    "parse_mpfile",
    "serialize_mpfile",
    "split_contributions",
    "validate_document",
    "__version__",
]
