from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping


@dataclass(frozen=True)
class Verdict:
    """A decision together with the evidence for it.

    ``verdict`` is a short machine-readable label such as ``"projective"`` or
    ``"degenerate"``; ``ok`` says whether the property asked about holds; the
    witness holds Python objects and is serialised by the CLI layer.
    """

    verdict: str
    ok: bool
    witness: Mapping[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok
